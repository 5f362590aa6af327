#include "mtsmt/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "mtsmt/common.hpp"
#include "mtsmt/error.hpp"

namespace mtsmt::lm {

namespace {

constexpr double kBosLogprob = -99.0;  // begin marker is never predicted

Gram subgram(const Gram& g, std::size_t begin, std::size_t len) {
  return Gram(g.begin() + static_cast<long>(begin),
              g.begin() + static_cast<long>(begin + len));
}

}  // namespace

LmVocab::LmVocab() {
  add(kUnkSurface);
  add(kBosSurface);
  add(kEosSurface);
}

WordId LmVocab::add(const std::string& w) {
  auto [it, inserted] = ids_.emplace(w, static_cast<WordId>(surfaces_.size()));
  if (inserted) surfaces_.push_back(w);
  return it->second;
}

WordId LmVocab::lookup(const std::string& w) const {
  auto it = ids_.find(w);
  return it == ids_.end() ? kUnk : it->second;
}

namespace {

std::vector<Gram> pad_sentences(const std::vector<Sentence>& side,
                                LmVocab& vocab) {
  std::vector<Gram> padded(side.size());
  for (std::size_t s = 0; s < side.size(); ++s) {
    Gram g;
    g.reserve(side[s].size() + 2);
    g.push_back(kBos);
    for (const auto& tok : side[s]) g.push_back(vocab.add(tok));
    g.push_back(kEos);
    padded[s] = std::move(g);
  }
  return padded;
}

void count_block(const std::vector<Gram>& padded, int order, std::size_t begin,
                 std::size_t end, std::vector<GramMap<std::uint64_t>>& counts) {
  for (std::size_t s = begin; s < end; ++s) {
    const Gram& sent = padded[s];
    for (int k = 1; k <= order; ++k) {
      if (sent.size() < static_cast<std::size_t>(k)) continue;
      for (std::size_t i = 0; i + k <= sent.size(); ++i)
        ++counts[static_cast<std::size_t>(k - 1)][subgram(sent, i, static_cast<std::size_t>(k))];
    }
  }
}

void fill_continuation(NGramCounts& nc) {
  nc.continuation.assign(static_cast<std::size_t>(std::max(0, nc.order - 1)),
                         {});
  for (int k = 1; k < nc.order; ++k) {
    auto& cc = nc.continuation[static_cast<std::size_t>(k - 1)];
    for (const auto& [gram, cnt] : nc.counts[static_cast<std::size_t>(k)]) {
      (void)cnt;
      ++cc[subgram(gram, 1, static_cast<std::size_t>(k))];
    }
  }
}

template <typename BlockRunner>
NGramCounts count_impl(const std::vector<Sentence>& side, int order,
                       BlockRunner&& run) {
  if (order < 1) throw Error("n-gram order must be >= 1");
  NGramCounts nc;
  nc.order = order;
  const std::vector<Gram> padded = pad_sentences(side, nc.vocab);
  nc.counts.assign(static_cast<std::size_t>(order), {});

  constexpr std::size_t kBlock = 512;
  const std::size_t nblocks = padded.empty() ? 0 : (padded.size() + kBlock - 1) / kBlock;
  std::vector<std::vector<GramMap<std::uint64_t>>> partial(nblocks);
  run(padded.size(), kBlock, [&](std::size_t begin, std::size_t end) {
    auto& local = partial[begin / kBlock];
    local.assign(static_cast<std::size_t>(order), {});
    count_block(padded, order, begin, end, local);
  });
  for (auto& local : partial)
    for (int k = 0; k < order; ++k)
      for (const auto& [gram, cnt] : local[static_cast<std::size_t>(k)])
        nc.counts[static_cast<std::size_t>(k)][gram] += cnt;

  fill_continuation(nc);
  return nc;
}

}  // namespace

NGramCounts count_ngrams(const std::vector<Sentence>& side, int order) {
  return count_impl(side, order, [](std::size_t n, std::size_t bs, auto fn) {
    parallel_blocks(n, bs, fn);
  });
}

NGramCounts count_ngrams_serial(const std::vector<Sentence>& side, int order) {
  return count_impl(side, order, [](std::size_t n, std::size_t bs, auto fn) {
    serial_blocks(n, bs, fn);
  });
}

namespace {

// Estimation works on "effective" per-level counts. Witten-Bell uses raw
// counts at every level. Kneser-Ney uses raw counts at the top order and
// continuation counts below, except that grams starting with the begin
// marker keep raw counts (they have no left context to count).
struct LevelStats {
  GramMap<std::uint64_t> eff;                // effective k-gram counts
  GramMap<std::uint64_t> denom;              // history -> sum of extensions
  GramMap<std::uint64_t> distinct;           // history -> distinct extensions
  std::uint64_t n1 = 0, n2 = 0;              // counts of effective counts
};

LevelStats level_stats(const NGramCounts& nc, int k, bool continuation_counts) {
  LevelStats ls;
  const auto& raw = nc.counts[static_cast<std::size_t>(k - 1)];
  if (!continuation_counts) {
    ls.eff = raw;
  } else {
    for (const auto& [gram, cc] : nc.continuation[static_cast<std::size_t>(k - 1)])
      ls.eff[gram] = cc;
    for (const auto& [gram, cnt] : raw)
      if (gram.front() == kBos) ls.eff[gram] = cnt;
  }
  // The begin marker is never predicted; drop it from every distribution.
  ls.eff.erase(Gram{kBos});
  for (const auto& [gram, cnt] : ls.eff) {
    if (gram.back() == kBos) continue;
    if (k > 1) {
      const Gram hist = subgram(gram, 0, gram.size() - 1);
      ls.denom[hist] += cnt;
      ++ls.distinct[hist];
    }
    if (cnt == 1) ++ls.n1;
    if (cnt == 2) ++ls.n2;
  }
  return ls;
}

struct UnigramLevel {
  std::map<Gram, double> prob;  // ordered for deterministic iteration
  double uniform = 0.0;         // mass given to every unseen predicted word
};

// Each level is built top-down over the effective counts; probs for grams
// seen at the level, plus an interpolation weight per history that becomes
// the ARPA backoff weight.
struct BuiltLevel {
  std::map<Gram, double> prob;
  std::map<Gram, double> bow;
};

}  // namespace

namespace {

NGramModel estimate_impl(const NGramCounts& input, Smoothing requested,
                         std::uint64_t unk_floor) {
  if (input.order < 1) throw Error("cannot estimate: counts are empty");
  if (input.counts[0].empty()) throw Error("cannot estimate: no unigram counts");

  // Pool sub-threshold words into <unk> when requested; pooled words leave
  // the vocabulary entirely so the normalization invariant stays exact.
  NGramCounts pooled;
  const NGramCounts* nc = &input;
  if (unk_floor > 1) {
    pooled.order = input.order;
    std::vector<WordId> remap(input.vocab.size(), kUnk);
    remap[kBos] = kBos;
    remap[kEos] = kEos;
    for (WordId id = kEos + 1; id < input.vocab.size(); ++id) {
      const Gram uni{id};
      auto it = input.counts[0].find(uni);
      const std::uint64_t cnt = it == input.counts[0].end() ? 0 : it->second;
      if (cnt >= unk_floor) remap[id] = pooled.vocab.add(input.vocab.surface(id));
    }
    pooled.counts.assign(static_cast<std::size_t>(input.order), {});
    for (int k = 0; k < input.order; ++k)
      for (const auto& [gram, cnt] : input.counts[static_cast<std::size_t>(k)]) {
        Gram g = gram;
        for (WordId& w : g) w = remap[w];
        pooled.counts[static_cast<std::size_t>(k)][g] += cnt;
      }
    fill_continuation(pooled);
    nc = &pooled;
  }

  NGramModel model;
  model.order = nc->order;
  model.smoothing = requested;
  model.vocab = nc->vocab;

  // Predicted vocabulary: all words except <s>, plus <unk> and </s>.
  const double vocab_size = static_cast<double>(model.predicted_vocab_size());

  const bool want_kn = requested == Smoothing::kneser_ney_interpolated;
  std::vector<BuiltLevel> levels(static_cast<std::size_t>(nc->order));
  std::vector<LevelStats> stats;
  stats.reserve(static_cast<std::size_t>(nc->order));
  for (int k = 1; k <= nc->order; ++k)
    stats.push_back(level_stats(*nc, k, want_kn && k < nc->order));

  // Pick the method per order. A degenerate order keeps Kneser-Ney's count
  // type but swaps in the Witten-Bell interpolation weight.
  std::vector<Smoothing> method(static_cast<std::size_t>(nc->order), requested);
  if (want_kn) {
    for (int k = 1; k <= nc->order; ++k) {
      const auto& ls = stats[static_cast<std::size_t>(k - 1)];
      if (ls.n1 == 0 || ls.n2 == 0) {
        method[static_cast<std::size_t>(k - 1)] = Smoothing::witten_bell;
        model.warnings.push_back(
            "order " + std::to_string(k) +
            ": counts-of-counts degenerate (n1=" + std::to_string(ls.n1) +
            ", n2=" + std::to_string(ls.n2) + "), using Witten-Bell");
      }
    }
  }

  // Unigram level. Interpolates with the uniform distribution, which is
  // where <unk> (and every unseen word) gets its mass.
  {
    const auto& ls = stats[0];
    double total = 0.0;
    std::uint64_t types = 0;
    for (const auto& [gram, cnt] : ls.eff) {
      total += static_cast<double>(cnt);
      ++types;
    }
    auto& lvl = levels[0];
    if (method[0] == Smoothing::kneser_ney_interpolated) {
      const double d = static_cast<double>(ls.n1) /
                       (static_cast<double>(ls.n1) + 2.0 * static_cast<double>(ls.n2));
      const double lambda = d * static_cast<double>(types) / total;
      for (const auto& [gram, cnt] : ls.eff)
        lvl.prob[gram] =
            (static_cast<double>(cnt) - d) / total + lambda / vocab_size;
      // <unk> gets the uniform share unless pooling gave it real counts.
      lvl.prob.emplace(Gram{kUnk}, lambda / vocab_size);
    } else {
      const double lambda = total / (total + static_cast<double>(types));
      for (const auto& [gram, cnt] : ls.eff)
        lvl.prob[gram] = lambda * static_cast<double>(cnt) / total +
                         (1.0 - lambda) / vocab_size;
      lvl.prob.emplace(Gram{kUnk}, (1.0 - lambda) / vocab_size);
    }
  }

  // Higher levels.
  for (int k = 2; k <= nc->order; ++k) {
    const auto& ls = stats[static_cast<std::size_t>(k - 1)];
    auto& lvl = levels[static_cast<std::size_t>(k - 1)];
    const auto& lower = levels[static_cast<std::size_t>(k - 2)];
    const bool kn = method[static_cast<std::size_t>(k - 1)] ==
                    Smoothing::kneser_ney_interpolated;
    const double d =
        kn ? static_cast<double>(ls.n1) /
                 (static_cast<double>(ls.n1) + 2.0 * static_cast<double>(ls.n2))
           : 0.0;
    for (const auto& [hist, denom_u] : ls.denom) {
      const double denom = static_cast<double>(denom_u);
      const double types =
          static_cast<double>(ls.distinct.find(hist)->second);
      // The stored weight is the share given to the lower order; for
      // Witten-Bell that is 1 - c/(c+T) = T/(c+T).
      lvl.bow[hist] = kn ? d * types / denom : types / (denom + types);
    }
    for (const auto& [gram, cnt_u] : ls.eff) {
      if (gram.back() == kBos) continue;
      const Gram hist = subgram(gram, 0, gram.size() - 1);
      const Gram lower_gram = subgram(gram, 1, gram.size() - 1);
      const double denom = static_cast<double>(ls.denom.find(hist)->second);
      const double cnt = static_cast<double>(cnt_u);
      auto lower_it = lower.prob.find(lower_gram);
      if (lower_it == lower.prob.end())
        throw Error("internal: missing lower-order gram during estimation");
      const double lower_p = lower_it->second;
      const double lambda = lvl.bow.find(hist)->second;
      if (kn) {
        lvl.prob[gram] = std::max(cnt - d, 0.0) / denom + lambda * lower_p;
      } else {
        lvl.prob[gram] = (1.0 - lambda) * cnt / denom + lambda * lower_p;
      }
    }
  }

  // Assemble the ARPA-style table.
  model.table.assign(static_cast<std::size_t>(nc->order), {});
  for (int k = 1; k <= nc->order; ++k) {
    auto& tab = model.table[static_cast<std::size_t>(k - 1)];
    const auto& lvl = levels[static_cast<std::size_t>(k - 1)];
    for (const auto& [gram, p] : lvl.prob) {
      NGramEntry e;
      e.logprob = std::log10(p);
      tab[gram] = e;
    }
    if (k < nc->order) {
      const auto& next = levels[static_cast<std::size_t>(k)];
      for (const auto& [hist, lambda] : next.bow) {
        auto& e = tab[hist];
        e.backoff = std::log10(lambda);
        e.has_backoff = true;
      }
    }
  }
  // Begin marker: context only.
  if (nc->order >= 2) {
    auto& uni = model.table[0];
    auto it = uni.find(Gram{kBos});
    if (it != uni.end()) it->second.logprob = kBosLogprob;
  }
  return model;
}

}  // namespace

NGramModel estimate_kneser_ney(const NGramCounts& counts, std::uint64_t unk_floor) {
  return estimate_impl(counts, Smoothing::kneser_ney_interpolated, unk_floor);
}

NGramModel estimate_witten_bell(const NGramCounts& counts) {
  return estimate_impl(counts, Smoothing::witten_bell, 1);
}

std::size_t NGramModel::predicted_vocab_size() const {
  return vocab.size() - 1;  // everything except <s>
}

double NGramModel::logprob_ids(std::span<const WordId> history, WordId word) const {
  if (word == kBos) return kBosLogprob;
  const std::size_t max_hist = static_cast<std::size_t>(order - 1);
  std::size_t len = std::min(history.size(), max_hist);
  // Walk from the longest usable history down, accumulating backoff
  // weights of stored histories that lack the full gram.
  double backoff_sum = 0.0;
  while (true) {
    Gram g;
    g.reserve(len + 1);
    for (std::size_t i = history.size() - len; i < history.size(); ++i)
      g.push_back(history[i]);
    g.push_back(word);
    const auto& tab = table[len];
    auto it = tab.find(g);
    if (it != tab.end()) return backoff_sum + it->second.logprob;
    if (len == 0) {
      // Unseen unigram: map to <unk>.
      auto unk_it = table[0].find(Gram{kUnk});
      return backoff_sum + unk_it->second.logprob;
    }
    Gram hist(g.begin(), g.end() - 1);
    const auto& hist_tab = table[len - 1];
    auto hit = hist_tab.find(hist);
    if (hit != hist_tab.end() && hit->second.has_backoff)
      backoff_sum += hit->second.backoff;
    --len;
  }
}

double NGramModel::logprob(const std::vector<std::string>& history,
                           const std::string& word) const {
  std::vector<WordId> h;
  h.reserve(history.size());
  for (const auto& w : history) h.push_back(vocab.lookup(w));
  return logprob_ids(h, vocab.lookup(word));
}

double perplexity(const NGramModel& model, const std::vector<Sentence>& side) {
  if (side.empty()) throw Error("perplexity: empty corpus");
  double log_sum = 0.0;
  std::uint64_t n = 0;
  for (const auto& sent : side) {
    std::vector<WordId> hist{kBos};
    for (const auto& tok : sent) {
      const WordId w = model.vocab.lookup(tok);
      log_sum += model.logprob_ids(hist, w);
      hist.push_back(w);
      ++n;
    }
    log_sum += model.logprob_ids(hist, kEos);
    ++n;
  }
  return std::pow(10.0, -log_sum / static_cast<double>(n));
}

// --- serialization ---

namespace {

constexpr char kMagic[4] = {'M', 'T', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error("cannot open model file: " + path);
  }
  void read(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw FormatError("truncated model file while reading " +
                            std::string(what) + " at byte " +
                            std::to_string(offset_),
                        offset_);
    offset_ += n;
  }
  template <typename T>
  T get(const char* what) {
    T v;
    read(&v, sizeof(T), what);
    return v;
  }
  std::size_t offset() const { return offset_; }

 private:
  std::ifstream in_;
  std::size_t offset_ = 0;
};

}  // namespace

void serialize(const NGramModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file: " + path);
  out.write(kMagic, 4);
  auto put = [&](const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  const std::uint32_t version = kVersion;
  put(&version, 4);
  const std::uint32_t order = static_cast<std::uint32_t>(model.order);
  put(&order, 4);
  const std::uint32_t smoothing = static_cast<std::uint32_t>(model.smoothing);
  put(&smoothing, 4);
  const std::uint64_t vocab_size = model.vocab.size();
  put(&vocab_size, 8);
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    const std::string& s = model.vocab.surface(i);
    const std::uint32_t len = static_cast<std::uint32_t>(s.size());
    put(&len, 4);
    put(s.data(), s.size());
  }
  for (int k = 1; k <= model.order; ++k) {
    const auto& tab = model.table[static_cast<std::size_t>(k - 1)];
    // Sorted dump so serialization is byte-stable.
    std::map<Gram, NGramEntry> sorted(tab.begin(), tab.end());
    const std::uint64_t n = sorted.size();
    put(&n, 8);
    for (const auto& [gram, e] : sorted) {
      put(gram.data(), gram.size() * sizeof(WordId));
      put(&e.logprob, 8);
      const std::uint8_t has = e.has_backoff ? 1 : 0;
      put(&has, 1);
      if (e.has_backoff) put(&e.backoff, 8);
    }
  }
  if (!out) throw Error("write failure: " + path);
}

NGramModel deserialize(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.read(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad magic in model file " + path + " at byte 0", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion)
    throw FormatError("unsupported model version " + std::to_string(version), 4);
  NGramModel model;
  model.order = static_cast<int>(r.get<std::uint32_t>("order"));
  if (model.order < 1 || model.order > 64)
    throw FormatError("implausible model order", 8);
  model.smoothing = static_cast<Smoothing>(r.get<std::uint32_t>("smoothing"));
  const auto vocab_size = r.get<std::uint64_t>("vocab size");
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    const auto len = r.get<std::uint32_t>("string length");
    std::string s(len, '\0');
    if (len) r.read(s.data(), len, "string");
    if (i >= 3) model.vocab.add(s);  // first three are the fixed markers
  }
  model.table.assign(static_cast<std::size_t>(model.order), {});
  for (int k = 1; k <= model.order; ++k) {
    const auto n = r.get<std::uint64_t>("entry count");
    auto& tab = model.table[static_cast<std::size_t>(k - 1)];
    tab.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < n; ++i) {
      Gram g(static_cast<std::size_t>(k));
      r.read(g.data(), g.size() * sizeof(WordId), "gram");
      for (WordId w : g)
        if (w >= vocab_size)
          throw FormatError("word id out of range at byte " +
                                std::to_string(r.offset()),
                            r.offset());
      NGramEntry e;
      e.logprob = r.get<double>("logprob");
      e.has_backoff = r.get<std::uint8_t>("backoff flag") != 0;
      if (e.has_backoff) e.backoff = r.get<double>("backoff");
      tab.emplace(std::move(g), e);
    }
  }
  return model;
}

void export_arpa(const NGramModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write ARPA file: " + path);
  out << "\\data\\\n";
  for (int k = 1; k <= model.order; ++k)
    out << "ngram " << k << "="
        << model.table[static_cast<std::size_t>(k - 1)].size() << "\n";
  char buf[64];
  for (int k = 1; k <= model.order; ++k) {
    out << "\n\\" << k << "-grams:\n";
    const auto& tab = model.table[static_cast<std::size_t>(k - 1)];
    // Sort by surface strings for a readable, deterministic file.
    std::map<std::string, const NGramEntry*> sorted;
    for (const auto& [gram, e] : tab) {
      std::string key;
      for (std::size_t i = 0; i < gram.size(); ++i) {
        if (i) key += ' ';
        key += model.vocab.surface(gram[i]);
      }
      sorted[key] = &e;
    }
    for (const auto& [key, e] : sorted) {
      std::snprintf(buf, sizeof(buf), "%.7f", e->logprob);
      out << buf << '\t' << key;
      if (e->has_backoff) {
        std::snprintf(buf, sizeof(buf), "%.7f", e->backoff);
        out << '\t' << buf;
      }
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

}  // namespace mtsmt::lm
