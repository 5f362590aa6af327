#pragma once

// Direct-formula reference model for checking the production n-gram
// estimators. Works on token strings with plain ordered maps and evaluates
// the smoothing recursions in probability space, sharing no code with the
// implementation under test.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lm_oracle {

using Sent = std::vector<std::string>;
using Gram = std::vector<std::string>;

class Model {
 public:
  Model(const std::vector<Sent>& corpus, int order, bool witten_bell)
      : order_(order), witten_bell_(witten_bell) {
    for (const auto& s : corpus) {
      Gram padded;
      padded.push_back("<s>");
      for (const auto& w : s) padded.push_back(w);
      padded.push_back("</s>");
      for (int k = 1; k <= order; ++k)
        for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= padded.size(); ++i)
          ++raw_[Gram(padded.begin() + static_cast<long>(i),
                      padded.begin() + static_cast<long>(i + static_cast<std::size_t>(k)))];
      for (const auto& w : s) vocab_.insert(w);
    }
    vocab_.insert("</s>");
    vocab_.insert("<unk>");  // predicted vocabulary; <s> stays out

    // Continuation counts: distinct left contexts per gram.
    for (const auto& [gram, cnt] : raw_) {
      (void)cnt;
      if (gram.size() >= 2)
        ++continuation_[Gram(gram.begin() + 1, gram.end())];
    }

    // Per-level effective counts and their statistics.
    effective_.resize(static_cast<std::size_t>(order) + 1);
    n1_.assign(static_cast<std::size_t>(order) + 1, 0);
    n2_.assign(static_cast<std::size_t>(order) + 1, 0);
    use_wb_.assign(static_cast<std::size_t>(order) + 1, witten_bell);
    discount_.assign(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 1; k <= order; ++k) {
      auto& eff = effective_[static_cast<std::size_t>(k)];
      if (witten_bell || k == order) {
        for (const auto& [gram, cnt] : raw_)
          if (static_cast<int>(gram.size()) == k) eff[gram] = cnt;
      } else {
        for (const auto& [gram, cnt] : continuation_)
          if (static_cast<int>(gram.size()) == k) eff[gram] = cnt;
        // Grams that begin a sentence have no left context; they keep
        // their raw counts.
        for (const auto& [gram, cnt] : raw_)
          if (static_cast<int>(gram.size()) == k && gram.front() == "<s>")
            eff[gram] = cnt;
      }
      eff.erase(Gram{"<s>"});
      for (const auto& [gram, cnt] : eff) {
        if (gram.back() == "<s>") continue;
        if (cnt == 1) ++n1_[static_cast<std::size_t>(k)];
        if (cnt == 2) ++n2_[static_cast<std::size_t>(k)];
      }
      if (!witten_bell) {
        if (n1_[static_cast<std::size_t>(k)] == 0 ||
            n2_[static_cast<std::size_t>(k)] == 0)
          use_wb_[static_cast<std::size_t>(k)] = true;
        else
          discount_[static_cast<std::size_t>(k)] =
              static_cast<double>(n1_[static_cast<std::size_t>(k)]) /
              (static_cast<double>(n1_[static_cast<std::size_t>(k)]) +
               2.0 * static_cast<double>(n2_[static_cast<std::size_t>(k)]));
      }
    }
  }

  double vocab_size() const { return static_cast<double>(vocab_.size()); }
  const std::set<std::string>& predicted_vocab() const { return vocab_; }

  // All histories (length 1..order-1) that have at least one extension at
  // their level, i.e. every history the model stores a backoff weight for.
  std::set<Gram> histories() const {
    std::set<Gram> out;
    for (int k = 2; k <= order_; ++k)
      for (const auto& [gram, cnt] : effective_[static_cast<std::size_t>(k)]) {
        (void)cnt;
        if (gram.back() == "<s>") continue;
        out.insert(Gram(gram.begin(), gram.end() - 1));
      }
    out.insert(Gram{});
    return out;
  }

  // P(word | history); unknown words map to <unk>, long histories truncate.
  double prob(Gram history, std::string word) const {
    if (vocab_.count(word) == 0 && word != "<s>") word = "<unk>";
    for (auto& h : history)
      if (h != "<s>" && vocab_.count(h) == 0) h = "<unk>";
    if (static_cast<int>(history.size()) > order_ - 1)
      history.erase(history.begin(),
                    history.end() - static_cast<long>(order_ - 1));
    return level_prob(static_cast<int>(history.size()) + 1, history, word);
  }

 private:
  double eff_of(int k, const Gram& gram) const {
    auto it = effective_[static_cast<std::size_t>(k)].find(gram);
    return it == effective_[static_cast<std::size_t>(k)].end()
               ? 0.0
               : static_cast<double>(it->second);
  }

  double level_prob(int k, const Gram& history, const std::string& word) const {
    if (k == 1) {
      double total = 0, types = 0;
      for (const auto& [gram, cnt] : effective_[1]) {
        if (gram.back() == "<s>") continue;
        total += static_cast<double>(cnt);
        types += 1;
      }
      const double e = eff_of(1, Gram{word});
      if (use_wb_[1]) {
        const double lambda = total / (total + types);
        return lambda * e / total + (1.0 - lambda) / vocab_size();
      }
      const double d = discount_[1];
      return std::max(e - d, 0.0) / total + d * types / total / vocab_size();
    }
    Gram shorter(history.begin() + 1, history.end());
    double denom = 0, types = 0;
    for (const auto& [gram, cnt] : effective_[static_cast<std::size_t>(k)]) {
      if (static_cast<int>(gram.size()) != k || gram.back() == "<s>") continue;
      if (std::equal(history.begin(), history.end(), gram.begin())) {
        denom += static_cast<double>(cnt);
        types += 1;
      }
    }
    const double lower = level_prob(k - 1, shorter, word);
    if (denom == 0) return lower;
    Gram full = history;
    full.push_back(word);
    const double e = eff_of(k, full);
    if (use_wb_[static_cast<std::size_t>(k)]) {
      const double lambda = denom / (denom + types);
      return lambda * e / denom + (1.0 - lambda) * lower;
    }
    const double d = discount_[static_cast<std::size_t>(k)];
    return std::max(e - d, 0.0) / denom + d * types / denom * lower;
  }

  int order_;
  bool witten_bell_;
  std::map<Gram, long> raw_;
  std::map<Gram, long> continuation_;
  std::vector<std::map<Gram, long>> effective_;
  std::vector<long> n1_, n2_;
  std::vector<bool> use_wb_;
  std::vector<double> discount_;
  std::set<std::string> vocab_;
};

// Seeded toy corpora for the estimator equivalence checks.
template <typename Rng>
std::vector<Sent> random_corpus(Rng& rng, std::size_t max_tokens) {
  static const char* words[] = {"a", "b", "c", "d", "e"};
  std::vector<Sent> corpus;
  std::size_t tokens = 0;
  while (tokens < max_tokens) {
    Sent s;
    const std::size_t len = 1 + rng() % 6;
    for (std::size_t i = 0; i < len && tokens < max_tokens; ++i, ++tokens)
      s.push_back(words[rng() % 5]);
    corpus.push_back(s);
  }
  return corpus;
}

}  // namespace lm_oracle
