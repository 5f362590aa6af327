#include "mtsmt/decode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

#include "mtsmt/common.hpp"
#include "mtsmt/error.hpp"

namespace mtsmt::decode {

namespace {

constexpr int kMaxSourceLen = 128;

const char* kPhiFe = "phi_fe";
const char* kLexFe = "lex_fe";
const char* kPhiEf = "phi_ef";
const char* kLexEf = "lex_ef";
const char* kLm = "lm";
const char* kDistortion = "distortion";
const char* kWordPenalty = "word_penalty";
const char* kOovPenalty = "oov_penalty";

std::string orientation_feature(bool prev, phrase::ReorderingScheme scheme,
                                int orientation) {
  static const char* kMsd[3] = {"mono", "swap", "disc"};
  static const char* kHier[4] = {"mono", "swap", "disc_left", "disc_right"};
  const char* tag = scheme == phrase::ReorderingScheme::msd_bidirectional
                        ? kMsd[orientation]
                        : kHier[orientation];
  return std::string("reo_") + (prev ? "prev_" : "next_") + tag;
}

}  // namespace

double Weights::get(const std::string& name) const {
  auto it = values.find(name);
  return it == values.end() ? 0.0 : it->second;
}

std::vector<std::string> reordering_feature_names(phrase::ReorderingScheme s) {
  std::vector<std::string> names;
  for (int dir = 0; dir < 2; ++dir)
    for (int o = 0; o < phrase::orientation_arity(s); ++o)
      names.push_back(orientation_feature(dir == 0, s, o));
  return names;
}

Weights Weights::defaults(std::optional<phrase::ReorderingScheme> scheme) {
  Weights w;
  w.values = {{kPhiFe, 0.2},      {kLexFe, 0.2},       {kPhiEf, 0.2},
              {kLexEf, 0.2},      {kLm, 0.5},          {kDistortion, 0.3},
              {kWordPenalty, 0.0}, {kOovPenalty, 1.0}};
  if (scheme)
    for (const auto& name : reordering_feature_names(*scheme))
      w.values[name] = 0.3;
  return w;
}

void Weights::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write weights file: " + path);
  char buf[64];
  for (const auto& [name, v] : values) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << name << '\t' << buf << '\n';
  }
}

Weights Weights::load(const std::string& path) {
  Weights w;
  std::size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("weights file " + path + " line " +
                        std::to_string(lineno) + ": expected name<TAB>value");
    w.values[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
  }
  return w;
}

std::vector<Option> collect_options(const Sentence& sentence,
                                    const phrase::PhraseTable& table,
                                    const DecoderConfig& config) {
  const int n = static_cast<int>(sentence.size());
  std::vector<Option> options;
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  const int max_len = std::min(config.max_phrase_len, table.max_source_len());
  for (int b = 0; b < n; ++b) {
    Sentence src;
    for (int e = b + 1; e <= std::min(n, b + std::max(max_len, 1)); ++e) {
      src.push_back(sentence[static_cast<std::size_t>(e - 1)]);
      const auto* opts = table.lookup(src);
      if (!opts) continue;
      for (const auto& o : *opts) {
        options.push_back({b, e, o.tgt, o.features, false});
        for (int i = b; i < e; ++i) covered[static_cast<std::size_t>(i)] = 1;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (covered[static_cast<std::size_t>(i)]) continue;
    Option o;
    o.src_begin = i;
    o.src_end = i + 1;
    o.tgt = {sentence[static_cast<std::size_t>(i)]};
    o.features = {1.0, 1.0, 1.0, 1.0};
    o.oov = true;
    options.push_back(std::move(o));
  }
  std::sort(options.begin(), options.end(),
            [](const Option& a, const Option& b) {
              if (a.src_begin != b.src_begin) return a.src_begin < b.src_begin;
              if (a.src_end != b.src_end) return a.src_end < b.src_end;
              return a.tgt < b.tgt;
            });
  return options;
}

namespace {

struct Coverage {
  std::array<std::uint64_t, 2> bits{0, 0};

  bool test(int i) const {
    return (bits[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1;
  }
  void set(int i) { bits[static_cast<std::size_t>(i >> 6)] |= 1ull << (i & 63); }
  bool operator==(const Coverage&) const = default;
};

struct Hyp {
  Coverage coverage;
  std::vector<std::string> tail;  // last order-1 output tokens
  int last_begin = 0, last_end = 0;
  double score = 0;
  double future = 0;
  int parent = -1;
  int option = -1;  // index into the options vector
};

// Static per-option score: weighted log phrase features plus word and OOV
// penalties; everything that does not depend on the hypothesis.
double option_static_score(const Option& o, const Weights& w) {
  double s = 0;
  if (!o.oov) {
    s += w.get(kPhiFe) * std::log10(o.features.phi_fe);
    s += w.get(kLexFe) * std::log10(o.features.lex_fe);
    s += w.get(kPhiEf) * std::log10(o.features.phi_ef);
    s += w.get(kLexEf) * std::log10(o.features.lex_ef);
  } else {
    s += w.get(kOovPenalty) * -1.0;
  }
  s += w.get(kWordPenalty) * static_cast<double>(o.tgt.size());
  return s;
}

double lm_unigram_estimate(const lm::NGramModel& model, const Sentence& tgt) {
  double s = 0;
  for (const auto& tok : tgt) s += model.logprob({}, tok);
  return s;
}

// Optimistic remaining-cost table over source spans: best option score with
// a unigram LM estimate, combined over the cheapest span partition.
std::vector<std::vector<double>> future_cost_table(
    int n, const std::vector<Option>& options, const Models& models,
    const Weights& weights) {
  constexpr double kNegInf = -1e30;
  std::vector<std::vector<double>> fc(
      static_cast<std::size_t>(n),
      std::vector<double>(static_cast<std::size_t>(n + 1), kNegInf));
  for (const Option& o : options) {
    double s = option_static_score(o, weights) +
               weights.get(kLm) * lm_unigram_estimate(*models.lm, o.tgt);
    auto& cell = fc[static_cast<std::size_t>(o.src_begin)]
                   [static_cast<std::size_t>(o.src_end)];
    cell = std::max(cell, s);
  }
  for (int len = 2; len <= n; ++len)
    for (int b = 0; b + len <= n; ++b) {
      auto& cell = fc[static_cast<std::size_t>(b)][static_cast<std::size_t>(b + len)];
      for (int m = b + 1; m < b + len; ++m) {
        const double split = fc[static_cast<std::size_t>(b)][static_cast<std::size_t>(m)] +
                             fc[static_cast<std::size_t>(m)][static_cast<std::size_t>(b + len)];
        cell = std::max(cell, split);
      }
    }
  return fc;
}

double future_cost_of(const Coverage& cov, int n,
                      const std::vector<std::vector<double>>& fc) {
  double total = 0;
  int run_start = -1;
  for (int i = 0; i <= n; ++i) {
    const bool covered = i == n || cov.test(i);
    if (!covered && run_start < 0) run_start = i;
    if (covered && run_start >= 0) {
      total += fc[static_cast<std::size_t>(run_start)][static_cast<std::size_t>(i)];
      run_start = -1;
    }
  }
  return total;
}

// Maximal contiguous covered run containing [b, e).
phrase::SpanPair covered_run(const Coverage& cov, int n, int b, int e) {
  int lo = b, hi = e;
  while (lo > 0 && cov.test(lo - 1)) --lo;
  while (hi < n && cov.test(hi)) ++hi;
  return {lo, hi, 0, 0};
}

// Reordering contribution of appending `cur` after the previous phrase:
// cur's previous-direction probability, anchored at the merged covered
// block under hier-mslr, plus the previous phrase's next-direction
// probability against cur alone. score_derivation applies the same
// geometry so both routes agree exactly.
double transition_reordering(const Models& models, const Weights& weights,
                             const Coverage& cov_with_prev, int n,
                             const phrase::SpanPair& prev_span,
                             const std::string& prev_src,
                             const std::string& prev_tgt,
                             const Sentence& sentence, const Option& cur) {
  const auto scheme = models.reordering->scheme;
  const bool hier = scheme == phrase::ReorderingScheme::hier_mslr_bidirectional;
  const phrase::SpanPair cur_span{cur.src_begin, cur.src_end, 0, 0};
  const phrase::SpanPair anchor =
      hier ? covered_run(cov_with_prev, n, prev_span.src_begin, prev_span.src_end)
           : prev_span;
  double s = 0;
  const std::string cur_src =
      join(Sentence(sentence.begin() + cur.src_begin,
                    sentence.begin() + cur.src_end));
  {
    const auto o = phrase::classify_orientation(anchor, cur_span, scheme);
    const auto& dist = models.reordering->lookup(cur_src, join(cur.tgt));
    s += weights.get(orientation_feature(true, scheme, static_cast<int>(o))) *
         std::log10(dist.prev[static_cast<std::size_t>(o)]);
  }
  {
    const auto o = phrase::classify_orientation(prev_span, cur_span, scheme);
    const auto& dist = models.reordering->lookup(prev_src, prev_tgt);
    s += weights.get(orientation_feature(false, scheme, static_cast<int>(o))) *
         std::log10(dist.next[static_cast<std::size_t>(o)]);
  }
  return s;
}

}  // namespace

DecodeResult decode(const Sentence& sentence, const Models& models,
                    const Weights& weights, const DecoderConfig& config) {
  if (!models.table || !models.lm) throw Error("decode: models not loaded");
  if (sentence.empty()) throw Error("decode: empty sentence");
  const int n = static_cast<int>(sentence.size());
  if (n > kMaxSourceLen)
    throw Error("decode: sentence longer than " + std::to_string(kMaxSourceLen) +
                " tokens");
  const std::vector<Option> options = collect_options(sentence, *models.table, config);
  const auto fc = future_cost_table(n, options, models, weights);
  const std::size_t tail_size = static_cast<std::size_t>(models.lm->order - 1);

  std::vector<Hyp> arena;
  arena.reserve(1024);
  Hyp init;
  init.tail = {lm::kBosSurface};
  init.last_begin = 0;
  init.last_end = 0;
  init.future = future_cost_of(init.coverage, n, fc);
  arena.push_back(init);

  std::vector<std::vector<int>> stacks(static_cast<std::size_t>(n + 1));
  stacks[0].push_back(0);

  // Tie order: output tokens first, then the applied span sequence, so
  // equal-scoring hypotheses have one deterministic winner even when their
  // outputs coincide.
  auto tie_key = [&](int idx) {
    std::vector<int> chain;
    for (int h = idx; h >= 0; h = arena[static_cast<std::size_t>(h)].parent)
      if (arena[static_cast<std::size_t>(h)].option >= 0) chain.push_back(h);
    std::reverse(chain.begin(), chain.end());
    Sentence out;
    std::vector<int> spans;
    for (int h : chain) {
      const Option& o = options[static_cast<std::size_t>(
          arena[static_cast<std::size_t>(h)].option)];
      for (const auto& tok : o.tgt) out.push_back(tok);
      spans.push_back(o.src_begin);
      spans.push_back(o.src_end);
    }
    return std::make_pair(std::move(out), std::move(spans));
  };
  auto lex_less = [&](int a, int b) { return tie_key(a) < tie_key(b); };

  auto prune = [&](std::vector<int>& stack) {
    std::sort(stack.begin(), stack.end(), [&](int a, int b) {
      const double sa = arena[static_cast<std::size_t>(a)].score +
                        arena[static_cast<std::size_t>(a)].future;
      const double sb = arena[static_cast<std::size_t>(b)].score +
                        arena[static_cast<std::size_t>(b)].future;
      if (sa != sb) return sa > sb;
      return lex_less(a, b);
    });
    if (static_cast<int>(stack.size()) > config.beam_size)
      stack.resize(static_cast<std::size_t>(config.beam_size));
  };

  // Recombination: identical (coverage, tail, last span) keep the better
  // score, ties the lexicographically smaller output.
  std::vector<std::unordered_map<std::string, int>> seen(
      static_cast<std::size_t>(n + 1));
  auto state_key = [&](const Hyp& h) {
    std::string key = std::to_string(h.coverage.bits[0]) + ":" +
                      std::to_string(h.coverage.bits[1]) + ":" +
                      std::to_string(h.last_begin) + ":" +
                      std::to_string(h.last_end) + ":";
    for (const auto& t : h.tail) {
      key += t;
      key += '\x1f';
    }
    return key;
  };

  for (int covered = 0; covered < n; ++covered) {
    auto& stack = stacks[static_cast<std::size_t>(covered)];
    prune(stack);
    for (const int hidx : stack) {
      for (std::size_t oi = 0; oi < options.size(); ++oi) {
        const Option& opt = options[oi];
        {
          const Hyp& h = arena[static_cast<std::size_t>(hidx)];
          // Span must be free and within the distortion limit.
          bool free_span = true;
          for (int i = opt.src_begin; i < opt.src_end && free_span; ++i)
            if (h.coverage.test(i)) free_span = false;
          if (!free_span) continue;
          if (std::abs(opt.src_begin - h.last_end) > config.distortion_limit)
            continue;
        }
        Hyp next;
        const Hyp& h = arena[static_cast<std::size_t>(hidx)];
        next.coverage = h.coverage;
        for (int i = opt.src_begin; i < opt.src_end; ++i) next.coverage.set(i);
        next.last_begin = opt.src_begin;
        next.last_end = opt.src_end;
        next.parent = hidx;
        next.option = static_cast<int>(oi);
        next.score = h.score + option_static_score(opt, weights);
        next.score +=
            weights.get(kDistortion) * -std::abs(opt.src_begin - h.last_end);
        // Language model over the new target words.
        std::vector<std::string> hist = h.tail;
        for (const auto& tok : opt.tgt) {
          next.score += weights.get(kLm) * models.lm->logprob(hist, tok);
          hist.push_back(tok);
        }
        if (hist.size() > tail_size)
          hist.erase(hist.begin(),
                     hist.end() - static_cast<long>(tail_size));
        next.tail = std::move(hist);
        // Lexicalized reordering for the transition, when not the first
        // phrase.
        if (models.reordering && h.option >= 0) {
          const Option& prev_opt = options[static_cast<std::size_t>(h.option)];
          Coverage before_prev = h.coverage;  // includes prev span
          next.score += transition_reordering(
              models, weights, before_prev, n,
              {prev_opt.src_begin, prev_opt.src_end, 0, 0},
              join(Sentence(sentence.begin() + prev_opt.src_begin,
                            sentence.begin() + prev_opt.src_end)),
              join(prev_opt.tgt), sentence, opt);
        }
        const int new_covered = covered + (opt.src_end - opt.src_begin);
        if (new_covered == n) {
          // Sentence-end transition.
          next.score +=
              weights.get(kLm) * models.lm->logprob(next.tail, lm::kEosSurface);
          next.future = 0;
        } else {
          next.future = future_cost_of(next.coverage, n, fc);
        }
        const std::string key = state_key(next);
        auto& bucket = seen[static_cast<std::size_t>(new_covered)];
        auto it = bucket.find(key);
        arena.push_back(std::move(next));
        const int nidx = static_cast<int>(arena.size() - 1);
        if (it == bucket.end()) {
          bucket.emplace(key, nidx);
          stacks[static_cast<std::size_t>(new_covered)].push_back(nidx);
        } else {
          const int old = it->second;
          const double so = arena[static_cast<std::size_t>(old)].score;
          const double sn = arena[static_cast<std::size_t>(nidx)].score;
          if (sn > so || (sn == so && lex_less(nidx, old))) {
            // Replace in place; the stack entry keeps pointing at `old`.
            std::swap(arena[static_cast<std::size_t>(old)],
                      arena[static_cast<std::size_t>(nidx)]);
          }
          arena.pop_back();
        }
      }
    }
  }

  DecodeResult result;
  auto& final_stack = stacks[static_cast<std::size_t>(n)];
  if (final_stack.empty()) {
    // Pathological pruning: monotone word-by-word copy-through.
    result.fallback = true;
    for (int i = 0; i < n; ++i) {
      DerivationStep step;
      step.src_begin = i;
      step.src_end = i + 1;
      step.tgt = {sentence[static_cast<std::size_t>(i)]};
      step.features = {1.0, 1.0, 1.0, 1.0};
      step.oov = true;
      result.derivation.push_back(step);
      result.translation.push_back(sentence[static_cast<std::size_t>(i)]);
    }
    result.score =
        score_derivation(sentence, result.derivation, models, weights).total;
    return result;
  }
  int best = final_stack[0];
  for (std::size_t i = 1; i < final_stack.size(); ++i) {
    const int cand = final_stack[i];
    const double sc = arena[static_cast<std::size_t>(cand)].score;
    const double sb = arena[static_cast<std::size_t>(best)].score;
    if (sc > sb || (sc == sb && lex_less(cand, best))) best = cand;
  }
  result.score = arena[static_cast<std::size_t>(best)].score;
  std::vector<int> chain;
  for (int h = best; h >= 0; h = arena[static_cast<std::size_t>(h)].parent)
    if (arena[static_cast<std::size_t>(h)].option >= 0) chain.push_back(h);
  std::reverse(chain.begin(), chain.end());
  for (int h : chain) {
    const Option& o = options[static_cast<std::size_t>(
        arena[static_cast<std::size_t>(h)].option)];
    DerivationStep step;
    step.src_begin = o.src_begin;
    step.src_end = o.src_end;
    step.tgt = o.tgt;
    step.features = o.features;
    step.oov = o.oov;
    result.derivation.push_back(step);
    for (const auto& tok : o.tgt) result.translation.push_back(tok);
  }
  return result;
}

FeatureBreakdown score_derivation(const Sentence& sentence,
                                  const std::vector<DerivationStep>& derivation,
                                  const Models& models, const Weights& weights) {
  FeatureBreakdown out;
  auto add = [&](const std::string& name, double v) { out.h[name] += v; };
  std::vector<std::string> hist{lm::kBosSurface};
  int last_end = 0;
  Coverage cov;
  const int n = static_cast<int>(sentence.size());
  for (std::size_t k = 0; k < derivation.size(); ++k) {
    const DerivationStep& step = derivation[k];
    if (!step.oov) {
      add(kPhiFe, std::log10(step.features.phi_fe));
      add(kLexFe, std::log10(step.features.lex_fe));
      add(kPhiEf, std::log10(step.features.phi_ef));
      add(kLexEf, std::log10(step.features.lex_ef));
    } else {
      add(kOovPenalty, -1.0);
    }
    add(kWordPenalty, static_cast<double>(step.tgt.size()));
    add(kDistortion, -std::abs(step.src_begin - last_end));
    for (const auto& tok : step.tgt) {
      add(kLm, models.lm->logprob(hist, tok));
      hist.push_back(tok);
    }
    if (models.reordering && k > 0) {
      const DerivationStep& prev = derivation[k - 1];
      const auto scheme = models.reordering->scheme;
      const bool hier =
          scheme == phrase::ReorderingScheme::hier_mslr_bidirectional;
      const phrase::SpanPair prev_span{prev.src_begin, prev.src_end, 0, 0};
      const phrase::SpanPair cur_span{step.src_begin, step.src_end, 0, 0};
      const phrase::SpanPair anchor =
          hier ? covered_run(cov, n, prev.src_begin, prev.src_end) : prev_span;
      const std::string cur_src =
          join(Sentence(sentence.begin() + step.src_begin,
                        sentence.begin() + step.src_end));
      const std::string prev_src =
          join(Sentence(sentence.begin() + prev.src_begin,
                        sentence.begin() + prev.src_end));
      {
        const auto o = phrase::classify_orientation(anchor, cur_span, scheme);
        const auto& dist = models.reordering->lookup(cur_src, join(step.tgt));
        add(orientation_feature(true, scheme, static_cast<int>(o)),
            std::log10(dist.prev[static_cast<std::size_t>(o)]));
      }
      {
        const auto o = phrase::classify_orientation(prev_span, cur_span, scheme);
        const auto& dist = models.reordering->lookup(prev_src, join(prev.tgt));
        add(orientation_feature(false, scheme, static_cast<int>(o)),
            std::log10(dist.next[static_cast<std::size_t>(o)]));
      }
    }
    for (int i = step.src_begin; i < step.src_end; ++i) cov.set(i);
    last_end = step.src_end;
  }
  add(kLm, models.lm->logprob(hist, lm::kEosSurface));
  for (const auto& [name, h] : out.h) out.total += weights.get(name) * h;
  return out;
}

namespace {

template <typename BlockRunner>
std::vector<DecodeResult> decode_corpus_impl(
    const std::vector<Sentence>& sentences, const Models& models,
    const Weights& weights, const DecoderConfig& config, BlockRunner&& run) {
  std::vector<DecodeResult> out(sentences.size());
  run(sentences.size(), 8, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s)
      out[s] = decode(sentences[s], models, weights, config);
  });
  return out;
}

}  // namespace

std::vector<DecodeResult> decode_corpus(const std::vector<Sentence>& sentences,
                                        const Models& models,
                                        const Weights& weights,
                                        const DecoderConfig& config) {
  return decode_corpus_impl(sentences, models, weights, config,
                            [](std::size_t n, std::size_t bs, auto fn) {
                              parallel_blocks(n, bs, fn);
                            });
}

std::vector<DecodeResult> decode_corpus_serial(
    const std::vector<Sentence>& sentences, const Models& models,
    const Weights& weights, const DecoderConfig& config) {
  return decode_corpus_impl(sentences, models, weights, config,
                            [](std::size_t n, std::size_t bs, auto fn) {
                              serial_blocks(n, bs, fn);
                            });
}

namespace {

double dev_bleu(const std::vector<Sentence>& dev_src,
                const std::vector<metrics::Refs>& dev_refs, const Models& models,
                const Weights& weights, const DecoderConfig& config) {
  const auto results = decode_corpus(dev_src, models, weights, config);
  std::vector<Sentence> hyps;
  hyps.reserve(results.size());
  for (const auto& r : results) hyps.push_back(r.translation);
  return metrics::bleu(hyps, dev_refs);
}

}  // namespace

Weights tune_weights(const std::vector<Sentence>& dev_src,
                     const std::vector<metrics::Refs>& dev_refs,
                     const Models& models, const Weights& initial,
                     const TuneConfig& config) {
  if (dev_src.empty()) throw Error("tune: empty dev set");
  if (dev_src.size() != dev_refs.size())
    throw Error("tune: dev source/reference size mismatch");
  static const double kGrid[] = {0.25, 0.5, 0.8, 1.25, 2.0, 4.0};
  static const double kZeroProbe[] = {-2, -1, -0.5, -0.25, 0.25, 0.5, 1, 2};

  Weights best = initial;
  double best_score = dev_bleu(dev_src, dev_refs, models, initial, config.decoder);

  std::mt19937_64 rng(config.seed);
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
  };

  for (int restart = 0; restart < std::max(1, config.restarts); ++restart) {
    Weights w = initial;
    if (restart > 0)
      for (auto& [name, v] : w.values) v += uniform() - 0.5;
    double score = dev_bleu(dev_src, dev_refs, models, w, config.decoder);
    for (int pass = 0; pass < config.iterations; ++pass) {
      bool improved = false;
      for (const auto& [name, v0] : std::map<std::string, double>(w.values)) {
        std::vector<double> candidates;
        if (std::abs(w.get(name)) < 1e-12) {
          candidates.assign(std::begin(kZeroProbe), std::end(kZeroProbe));
        } else {
          for (double m : kGrid) candidates.push_back(w.get(name) * m);
        }
        for (double cand : candidates) {
          Weights trial = w;
          trial.set(name, cand);
          const double s =
              dev_bleu(dev_src, dev_refs, models, trial, config.decoder);
          if (s > score) {
            score = s;
            w = trial;
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    if (score > best_score) {
      best_score = score;
      best = w;
    }
  }
  return best;
}

}  // namespace mtsmt::decode
