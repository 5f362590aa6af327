#include "mtsmt/align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "mtsmt/common.hpp"
#include "mtsmt/error.hpp"

namespace mtsmt::align {

void AlignmentLinks::insert(Link l) {
  auto it = std::lower_bound(links.begin(), links.end(), l);
  if (it == links.end() || *it != l) links.insert(it, l);
}

bool AlignmentLinks::contains(Link l) const {
  return std::binary_search(links.begin(), links.end(), l);
}

std::uint32_t AlignVocab::add(const std::string& w) {
  auto [it, inserted] = ids_.emplace(w, static_cast<std::uint32_t>(surfaces_.size()));
  if (inserted) surfaces_.push_back(w);
  return it->second;
}

std::optional<std::uint32_t> AlignVocab::id_of(const std::string& w) const {
  auto it = ids_.find(w);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

double LexicalTable::prob(std::uint32_t cond, std::uint32_t gen) const {
  if (cond >= rows.size()) return kFloorProb;
  const auto& row = rows[cond];
  auto it = row.find(gen);
  return it == row.end() ? kFloorProb : std::max(it->second, kFloorProb);
}

double LexicalTable::prob_surface(const std::string& cond,
                                  const std::string& gen) const {
  const auto c = cond_vocab.id_of(cond);
  const auto g = gen_vocab.id_of(gen);
  if (!c || !g) return kFloorProb;
  return prob(*c, *g);
}

Heuristic heuristic_from_name(const std::string& name) {
  if (name == "intersection") return Heuristic::intersection;
  if (name == "union") return Heuristic::union_all;
  if (name == "grow") return Heuristic::grow;
  if (name == "grow-diag") return Heuristic::grow_diag;
  if (name == "grow-diag-final") return Heuristic::grow_diag_final;
  if (name == "grow-diag-final-and") return Heuristic::grow_diag_final_and;
  throw Error("unknown symmetrization heuristic: " + name);
}

const char* heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::intersection: return "intersection";
    case Heuristic::union_all: return "union";
    case Heuristic::grow: return "grow";
    case Heuristic::grow_diag: return "grow-diag";
    case Heuristic::grow_diag_final: return "grow-diag-final";
    case Heuristic::grow_diag_final_and: return "grow-diag-final-and";
  }
  return "?";
}

namespace {

// Sentence pairs as id sequences; ids are assigned serially before any
// parallel work so they are independent of thread count.
struct IdCorpus {
  std::vector<std::vector<std::uint32_t>> src;  // generated side
  std::vector<std::vector<std::uint32_t>> tgt;  // conditioning side
  AlignVocab cond_vocab;
  AlignVocab gen_vocab;
};

IdCorpus intern_corpus(const ParallelCorpus& corpus) {
  IdCorpus ic;
  ic.src.resize(corpus.pairs.size());
  ic.tgt.resize(corpus.pairs.size());
  for (std::size_t p = 0; p < corpus.pairs.size(); ++p) {
    for (const auto& t : corpus.pairs[p].source)
      ic.src[p].push_back(ic.gen_vocab.add(t));
    for (const auto& t : corpus.pairs[p].target)
      ic.tgt[p].push_back(ic.cond_vocab.add(t));
  }
  return ic;
}

using CountRows = std::vector<std::unordered_map<std::uint32_t, double>>;

void init_uniform(const IdCorpus& ic, LexicalTable& table) {
  table.cond_vocab = ic.cond_vocab;
  table.gen_vocab = ic.gen_vocab;
  std::vector<std::set<std::uint32_t>> cooc(ic.cond_vocab.size());
  for (std::size_t p = 0; p < ic.src.size(); ++p)
    for (std::uint32_t e : ic.tgt[p])
      for (std::uint32_t f : ic.src[p]) cooc[e].insert(f);
  table.rows.assign(ic.cond_vocab.size(), {});
  // Null co-occurs with every source word.
  auto& null_row = table.rows[kNullWord];
  const double null_p = 1.0 / static_cast<double>(ic.gen_vocab.size() - 1);
  for (std::uint32_t f = 1; f < ic.gen_vocab.size(); ++f) null_row[f] = null_p;
  for (std::uint32_t e = 1; e < ic.cond_vocab.size(); ++e) {
    if (cooc[e].empty()) continue;
    const double p = 1.0 / static_cast<double>(cooc[e].size());
    for (std::uint32_t f : cooc[e]) table.rows[e][f] = p;
  }
}

// Diagonal prior weight for generated position i (of m) conditioned on
// position j (of l); 1-based fractions through the sentence.
inline double diag_distance(std::size_t i, std::size_t m, std::size_t j,
                            std::size_t l) {
  return std::abs(static_cast<double>(i + 1) / static_cast<double>(m) -
                  static_cast<double>(j + 1) / static_cast<double>(l));
}

struct EStepResult {
  CountRows counts;
  double log_likelihood = 0.0;
  double posterior_diag = 0.0;   // sum over tokens/positions of gamma * d
  std::vector<double> link_mass; // per source token: 1 - gamma_null
};

// One E-step over [begin, end); lambda < 0 selects the Model 1 uniform
// prior, otherwise the fast-align diagonal prior with p_null.
EStepResult e_step_block(const IdCorpus& ic, const LexicalTable& table,
                         double lambda, double p_null, std::size_t begin,
                         std::size_t end, bool want_link_mass) {
  EStepResult r;
  r.counts.assign(table.rows.size(), {});
  for (std::size_t p = begin; p < end; ++p) {
    const auto& src = ic.src[p];
    const auto& tgt = ic.tgt[p];
    if (src.empty() || tgt.empty()) continue;
    const std::size_t m = src.size(), l = tgt.size();
    std::vector<double> prior(l);
    for (std::size_t i = 0; i < m; ++i) {
      double null_prior;
      if (lambda < 0) {
        null_prior = 1.0 / static_cast<double>(l + 1);
        std::fill(prior.begin(), prior.end(), null_prior);
      } else {
        double z = 0.0;
        for (std::size_t j = 0; j < l; ++j) {
          prior[j] = std::exp(-lambda * diag_distance(i, m, j, l));
          z += prior[j];
        }
        for (std::size_t j = 0; j < l; ++j) prior[j] *= (1.0 - p_null) / z;
        null_prior = p_null;
      }
      const double null_score = null_prior * table.prob(kNullWord, src[i]);
      double denom = null_score;
      for (std::size_t j = 0; j < l; ++j)
        denom += prior[j] * table.prob(tgt[j], src[i]);
      r.log_likelihood += std::log(denom);
      r.counts[kNullWord][src[i]] += null_score / denom;
      double mass = 0.0;
      for (std::size_t j = 0; j < l; ++j) {
        const double gamma = prior[j] * table.prob(tgt[j], src[i]) / denom;
        r.counts[tgt[j]][src[i]] += gamma;
        mass += gamma;
        if (lambda >= 0) r.posterior_diag += gamma * diag_distance(i, m, j, l);
      }
      if (want_link_mass) r.link_mass.push_back(mass);
    }
  }
  return r;
}

void normalize_rows(const CountRows& counts, LexicalTable& table) {
  for (std::size_t e = 0; e < counts.size(); ++e) {
    const auto& row = counts[e];
    if (row.empty()) continue;
    // Deterministic summation order.
    std::map<std::uint32_t, double> sorted(row.begin(), row.end());
    double total = 0.0;
    for (const auto& [f, c] : sorted) total += c;
    auto& out = table.rows[e];
    out.clear();
    for (const auto& [f, c] : sorted) out[f] = c / total;
  }
}

template <typename BlockRunner>
LexicalTable train_model1_impl(const ParallelCorpus& corpus, int iterations,
                               TrainStats* stats, BlockRunner&& run) {
  if (corpus.pairs.empty()) throw Error("cannot train aligner on empty corpus");
  if (iterations < 1) throw Error("aligner iterations must be >= 1");
  const IdCorpus ic = intern_corpus(corpus);
  LexicalTable table;
  init_uniform(ic, table);
  constexpr std::size_t kBlock = 256;
  const std::size_t nblocks = (ic.src.size() + kBlock - 1) / kBlock;
  for (int it = 0; it < iterations; ++it) {
    std::vector<EStepResult> partial(nblocks);
    run(ic.src.size(), kBlock, [&](std::size_t begin, std::size_t end) {
      partial[begin / kBlock] =
          e_step_block(ic, table, -1.0, 0.0, begin, end, false);
    });
    CountRows counts(table.rows.size());
    double ll = 0.0;
    for (const auto& part : partial) {
      ll += part.log_likelihood;
      for (std::size_t e = 0; e < part.counts.size(); ++e)
        for (const auto& [f, c] : std::map<std::uint32_t, double>(
                 part.counts[e].begin(), part.counts[e].end()))
          counts[e][f] += c;
    }
    // Model 1's uniform prior contributes -log(l+1) per source token.
    for (std::size_t p = 0; p < ic.src.size(); ++p)
      ll -= static_cast<double>(ic.src[p].size()) *
            std::log(static_cast<double>(ic.tgt[p].size() + 1));
    if (stats) stats->log_likelihood.push_back(ll);
    normalize_rows(counts, table);
  }
  return table;
}

}  // namespace

LexicalTable train_model1(const ParallelCorpus& corpus, int iterations,
                          TrainStats* stats) {
  return train_model1_impl(corpus, iterations, stats,
                           [](std::size_t n, std::size_t bs, auto fn) {
                             parallel_blocks(n, bs, fn);
                           });
}

LexicalTable train_model1_serial(const ParallelCorpus& corpus, int iterations,
                                 TrainStats* stats) {
  return train_model1_impl(corpus, iterations, stats,
                           [](std::size_t n, std::size_t bs, auto fn) {
                             serial_blocks(n, bs, fn);
                           });
}

FastAlignParams train_fast_align(const ParallelCorpus& corpus, int iterations,
                                 bool optimize_tension, double initial_tension,
                                 double p_null, TrainStats* stats) {
  if (corpus.pairs.empty()) throw Error("cannot train aligner on empty corpus");
  if (iterations < 1) throw Error("aligner iterations must be >= 1");
  if (initial_tension <= 0) throw Error("tension must be positive");
  if (p_null < 0 || p_null >= 1) throw Error("p_null must be in [0,1)");
  const IdCorpus ic = intern_corpus(corpus);
  FastAlignParams params;
  params.tension = initial_tension;
  params.p_null = p_null;
  init_uniform(ic, params.lex);

  constexpr std::size_t kBlock = 256;
  const std::size_t nblocks = (ic.src.size() + kBlock - 1) / kBlock;
  std::uint64_t total_tokens = 0;
  for (const auto& s : ic.src) total_tokens += s.size();

  for (int it = 0; it < iterations; ++it) {
    std::vector<EStepResult> partial(nblocks);
    parallel_blocks(ic.src.size(), kBlock, [&](std::size_t begin, std::size_t end) {
      partial[begin / kBlock] = e_step_block(ic, params.lex, params.tension,
                                             params.p_null, begin, end,
                                             optimize_tension);
    });
    CountRows counts(params.lex.rows.size());
    double ll = 0.0, post_diag = 0.0;
    std::vector<double> link_mass;
    for (const auto& part : partial) {
      ll += part.log_likelihood;
      post_diag += part.posterior_diag;
      for (std::size_t e = 0; e < part.counts.size(); ++e)
        for (const auto& [f, c] : std::map<std::uint32_t, double>(
                 part.counts[e].begin(), part.counts[e].end()))
          counts[e][f] += c;
      link_mass.insert(link_mass.end(), part.link_mass.begin(),
                       part.link_mass.end());
    }
    if (stats) stats->log_likelihood.push_back(ll);
    normalize_rows(counts, params.lex);

    if (optimize_tension) {
      // Gradient of the expected log prior wrt lambda, with the posterior
      // fixed from this E-step: sum_i (1-gamma_null_i) * E_prior[d_i] minus
      // the posterior diagonal mass.
      for (int step = 0; step < 8; ++step) {
        double prior_diag = 0.0;
        std::size_t tok = 0;
        for (std::size_t p = 0; p < ic.src.size(); ++p) {
          const std::size_t m = ic.src[p].size(), l = ic.tgt[p].size();
          if (m == 0 || l == 0) continue;
          for (std::size_t i = 0; i < m; ++i, ++tok) {
            double z = 0.0, zd = 0.0;
            for (std::size_t j = 0; j < l; ++j) {
              const double d = diag_distance(i, m, j, l);
              const double w = std::exp(-params.tension * d);
              z += w;
              zd += w * d;
            }
            prior_diag += link_mass[tok] * zd / z;
          }
        }
        const double grad = (prior_diag - post_diag) /
                            static_cast<double>(total_tokens);
        params.tension = std::clamp(params.tension + grad, 0.1, 14.0);
      }
    }
  }
  return params;
}

namespace {

AlignmentLinks viterbi_one_direction(const LexicalTable& table,
                                     const Sentence& gen_side,
                                     const Sentence& cond_side, double lambda,
                                     double p_null) {
  AlignmentLinks out;
  out.source_len = static_cast<int>(gen_side.size());
  out.target_len = static_cast<int>(cond_side.size());
  const std::size_t m = gen_side.size(), l = cond_side.size();
  std::vector<std::uint32_t> cond_ids(l);
  for (std::size_t j = 0; j < l; ++j)
    cond_ids[j] = table.cond_vocab.id_of(cond_side[j]).value_or(
        std::numeric_limits<std::uint32_t>::max());
  for (std::size_t i = 0; i < m; ++i) {
    const auto gen_id = table.gen_vocab.id_of(gen_side[i]);
    double z = 0.0;
    if (lambda >= 0)
      for (std::size_t j = 0; j < l; ++j)
        z += std::exp(-lambda * diag_distance(i, m, j, l));
    auto score_of = [&](std::size_t j) {
      const double lexical =
          (gen_id && cond_ids[j] != std::numeric_limits<std::uint32_t>::max())
              ? table.prob(cond_ids[j], *gen_id)
              : kFloorProb;
      if (lambda < 0) return lexical;  // Model 1: uniform prior cancels
      return (1.0 - p_null) * std::exp(-lambda * diag_distance(i, m, j, l)) /
             z * lexical;
    };
    const double null_lex = gen_id ? table.prob(kNullWord, *gen_id) : kFloorProb;
    double best = lambda < 0 ? null_lex : p_null * null_lex;
    int best_j = -1;  // null
    for (std::size_t j = 0; j < l; ++j) {
      const double s = score_of(j);
      if (s > best) {
        best = s;
        best_j = static_cast<int>(j);
      }
    }
    if (best_j >= 0)
      out.insert({static_cast<int>(i), best_j});
  }
  return out;
}

AlignmentLinks swap_links(const AlignmentLinks& in) {
  AlignmentLinks out;
  out.source_len = in.target_len;
  out.target_len = in.source_len;
  for (const Link& l : in.links) out.insert({l.tgt, l.src});
  return out;
}

}  // namespace

AlignmentLinks viterbi_align(const LexicalTable& table, const SentencePair& pair,
                             Direction dir) {
  if (dir == Direction::forward)
    return viterbi_one_direction(table, pair.source, pair.target, -1.0, 0.0);
  return swap_links(
      viterbi_one_direction(table, pair.target, pair.source, -1.0, 0.0));
}

AlignmentLinks viterbi_align(const FastAlignParams& params,
                             const SentencePair& pair, Direction dir) {
  if (dir == Direction::forward)
    return viterbi_one_direction(params.lex, pair.source, pair.target,
                                 params.tension, params.p_null);
  return swap_links(viterbi_one_direction(params.lex, pair.target, pair.source,
                                          params.tension, params.p_null));
}

AlignmentLinks symmetrize(const AlignmentLinks& forward,
                          const AlignmentLinks& backward, Heuristic heuristic) {
  if (forward.source_len != backward.source_len ||
      forward.target_len != backward.target_len)
    throw Error("symmetrize: dimension mismatch (" +
                std::to_string(forward.source_len) + "x" +
                std::to_string(forward.target_len) + " vs " +
                std::to_string(backward.source_len) + "x" +
                std::to_string(backward.target_len) + ")");
  const int m = forward.source_len, n = forward.target_len;

  AlignmentLinks inter, uni;
  inter.source_len = uni.source_len = m;
  inter.target_len = uni.target_len = n;
  for (const Link& l : forward.links) {
    uni.insert(l);
    if (backward.contains(l)) inter.insert(l);
  }
  for (const Link& l : backward.links) uni.insert(l);

  if (heuristic == Heuristic::intersection) return inter;
  if (heuristic == Heuristic::union_all) return uni;

  AlignmentLinks current = inter;
  std::vector<char> src_aligned(static_cast<std::size_t>(m), 0);
  std::vector<char> tgt_aligned(static_cast<std::size_t>(n), 0);
  for (const Link& l : current.links) {
    src_aligned[static_cast<std::size_t>(l.src)] = 1;
    tgt_aligned[static_cast<std::size_t>(l.tgt)] = 1;
  }

  // Diagonal neighbours first, then the orthogonal ones.
  static const int kDiag[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  static const int kOrth[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  const bool use_diag = heuristic != Heuristic::grow;

  bool changed = true;
  while (changed) {
    changed = false;
    const std::vector<Link> snapshot = current.links;  // row-major scan
    for (const Link& p : snapshot) {
      auto try_add = [&](int ds, int dt) {
        const Link q{p.src + ds, p.tgt + dt};
        if (q.src < 0 || q.src >= m || q.tgt < 0 || q.tgt >= n) return;
        if (current.contains(q) || !uni.contains(q)) return;
        if (src_aligned[static_cast<std::size_t>(q.src)] &&
            tgt_aligned[static_cast<std::size_t>(q.tgt)])
          return;
        current.insert(q);
        src_aligned[static_cast<std::size_t>(q.src)] = 1;
        tgt_aligned[static_cast<std::size_t>(q.tgt)] = 1;
        changed = true;
      };
      if (use_diag)
        for (const auto& d : kDiag) try_add(d[0], d[1]);
      for (const auto& d : kOrth) try_add(d[0], d[1]);
    }
  }

  if (heuristic == Heuristic::grow_diag_final ||
      heuristic == Heuristic::grow_diag_final_and) {
    // Final pass; the unaligned tests look at the state after growing, so
    // final-and always yields a subset of final.
    const bool require_both = heuristic == Heuristic::grow_diag_final_and;
    const std::vector<char> src_after = src_aligned, tgt_after = tgt_aligned;
    for (const Link& q : uni.links) {
      if (current.contains(q)) continue;
      const bool src_free = !src_after[static_cast<std::size_t>(q.src)];
      const bool tgt_free = !tgt_after[static_cast<std::size_t>(q.tgt)];
      if (require_both ? (src_free && tgt_free) : (src_free || tgt_free))
        current.insert(q);
    }
  }
  return current;
}

namespace {

ParallelCorpus stem_corpus(const ParallelCorpus& corpus, std::size_t k) {
  ParallelCorpus out = corpus;
  for (auto& p : out.pairs) {
    for (auto& t : p.source) t = stem(t, k);
    for (auto& t : p.target) t = stem(t, k);
  }
  return out;
}

SentencePair stem_pair(const SentencePair& pair, std::size_t k) {
  SentencePair out = pair;
  for (auto& t : out.source) t = stem(t, k);
  for (auto& t : out.target) t = stem(t, k);
  return out;
}

ParallelCorpus swap_corpus(const ParallelCorpus& corpus) {
  ParallelCorpus out;
  out.source_lang = corpus.target_lang;
  out.target_lang = corpus.source_lang;
  out.pairs.reserve(corpus.pairs.size());
  for (const auto& p : corpus.pairs)
    out.pairs.push_back({p.target, p.source, p.line_number});
  return out;
}

}  // namespace

TrainedAligner train_aligner(const ParallelCorpus& corpus,
                             const AlignerConfig& cfg) {
  const ParallelCorpus train =
      cfg.stem_k > 0 ? stem_corpus(corpus, cfg.stem_k) : corpus;
  TrainedAligner out;
  out.config = cfg;
  if (cfg.kind == AlignerConfig::Kind::model1) {
    out.forward = train_model1(train, cfg.iterations);
    out.backward = train_model1(swap_corpus(train), cfg.iterations);
  } else {
    FastAlignParams fwd = train_fast_align(train, cfg.iterations,
                                           cfg.optimize_tension);
    FastAlignParams bwd = train_fast_align(swap_corpus(train), cfg.iterations,
                                           cfg.optimize_tension);
    out.forward = std::move(fwd.lex);
    out.backward = std::move(bwd.lex);
    out.fwd_tension = fwd.tension;
    out.bwd_tension = bwd.tension;
    out.p_null = fwd.p_null;
  }
  return out;
}

namespace {

AlignmentLinks align_one(const TrainedAligner& aligner, const SentencePair& raw) {
  const SentencePair pair =
      aligner.config.stem_k > 0 ? stem_pair(raw, aligner.config.stem_k) : raw;
  const bool m1 = aligner.config.kind == AlignerConfig::Kind::model1;
  const AlignmentLinks fwd = viterbi_one_direction(
      aligner.forward, pair.source, pair.target, m1 ? -1.0 : aligner.fwd_tension,
      aligner.p_null);
  const AlignmentLinks bwd = swap_links(viterbi_one_direction(
      aligner.backward, pair.target, pair.source,
      m1 ? -1.0 : aligner.bwd_tension, aligner.p_null));
  return symmetrize(fwd, bwd, aligner.config.heuristic);
}

}  // namespace

std::vector<AlignmentLinks> align_corpus(const TrainedAligner& aligner,
                                         const ParallelCorpus& corpus) {
  std::vector<AlignmentLinks> out(corpus.pairs.size());
  parallel_blocks(corpus.pairs.size(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p)
      out[p] = align_one(aligner, corpus.pairs[p]);
  });
  return out;
}

std::vector<AlignmentLinks> align_corpus_serial(const TrainedAligner& aligner,
                                                const ParallelCorpus& corpus) {
  std::vector<AlignmentLinks> out(corpus.pairs.size());
  for (std::size_t p = 0; p < corpus.pairs.size(); ++p)
    out[p] = align_one(aligner, corpus.pairs[p]);
  return out;
}

std::vector<AlignmentLinks> align_corpus(const ParallelCorpus& corpus,
                                         const AlignerConfig& cfg) {
  return align_corpus(train_aligner(corpus, cfg), corpus);
}

std::string to_pharaoh(const AlignmentLinks& links) {
  std::string out;
  for (std::size_t i = 0; i < links.links.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(links.links[i].src) + "-" +
           std::to_string(links.links[i].tgt);
  }
  return out;
}

AlignmentLinks from_pharaoh(const std::string& line, int source_len,
                            int target_len) {
  AlignmentLinks out;
  out.source_len = source_len;
  out.target_len = target_len;
  for (const std::string& tok : split_ws(line)) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos)
      throw FormatError("bad pharaoh link: " + tok);
    const int i = std::stoi(tok.substr(0, dash));
    const int j = std::stoi(tok.substr(dash + 1));
    if (i < 0 || i >= source_len || j < 0 || j >= target_len)
      throw FormatError("pharaoh link out of range: " + tok);
    out.insert({i, j});
  }
  return out;
}

// --- aligner persistence (text, full double precision) ---

namespace {

void save_table(std::ofstream& out, const LexicalTable& table) {
  out << "cond_vocab " << table.cond_vocab.size() << '\n';
  for (std::uint32_t i = 0; i < table.cond_vocab.size(); ++i)
    out << table.cond_vocab.surface(i) << '\n';
  out << "gen_vocab " << table.gen_vocab.size() << '\n';
  for (std::uint32_t i = 0; i < table.gen_vocab.size(); ++i)
    out << table.gen_vocab.surface(i) << '\n';
  char buf[64];
  out << "rows " << table.rows.size() << '\n';
  for (std::size_t e = 0; e < table.rows.size(); ++e) {
    std::map<std::uint32_t, double> sorted(table.rows[e].begin(),
                                           table.rows[e].end());
    out << "row " << e << ' ' << sorted.size() << '\n';
    for (const auto& [f, p] : sorted) {
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      out << f << ' ' << buf << '\n';
    }
  }
}

LexicalTable load_table(std::istream& in) {
  LexicalTable table;
  std::string word;
  std::size_t n;
  auto expect = [&](const char* tag) {
    in >> word;
    if (word != tag) throw FormatError("aligner file: expected " + std::string(tag));
  };
  expect("cond_vocab");
  in >> n;
  in.ignore();
  for (std::size_t i = 0; i < n; ++i) {
    std::string line;
    std::getline(in, line);
    if (i >= 1) table.cond_vocab.add(line);  // id 0 is the built-in null
  }
  expect("gen_vocab");
  in >> n;
  in.ignore();
  for (std::size_t i = 0; i < n; ++i) {
    std::string line;
    std::getline(in, line);
    if (i >= 1) table.gen_vocab.add(line);
  }
  expect("rows");
  in >> n;
  table.rows.assign(n, {});
  for (std::size_t r = 0; r < n; ++r) {
    expect("row");
    std::size_t id, cnt;
    in >> id >> cnt;
    for (std::size_t k = 0; k < cnt; ++k) {
      std::uint32_t f;
      double p;
      in >> f >> p;
      table.rows[id][f] = p;
    }
  }
  if (!in) throw FormatError("aligner file: truncated");
  return table;
}

}  // namespace

void TrainedAligner::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write aligner file: " + path);
  out << "mtsmt-aligner 1\n";
  out << "kind "
      << (config.kind == AlignerConfig::Kind::model1 ? "model1" : "fast-align")
      << '\n';
  out << "heuristic " << heuristic_name(config.heuristic) << '\n';
  out << "stem_k " << config.stem_k << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", fwd_tension, bwd_tension,
                p_null);
  out << "params " << buf << '\n';
  save_table(out, forward);
  save_table(out, backward);
}

TrainedAligner TrainedAligner::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open aligner file: " + path);
  std::string tag;
  int version;
  in >> tag >> version;
  if (tag != "mtsmt-aligner" || version != 1)
    throw FormatError("not an aligner file: " + path);
  TrainedAligner out;
  std::string kind;
  in >> tag >> kind;
  out.config.kind = kind == "model1" ? AlignerConfig::Kind::model1
                                     : AlignerConfig::Kind::fast_align;
  std::string heuristic;
  in >> tag >> heuristic;
  out.config.heuristic = heuristic_from_name(heuristic);
  in >> tag >> out.config.stem_k;
  in >> tag >> out.fwd_tension >> out.bwd_tension >> out.p_null;
  out.forward = load_table(in);
  out.backward = load_table(in);
  return out;
}

}  // namespace mtsmt::align
