#include "mtsmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "mtsmt/common.hpp"
#include "mtsmt/error.hpp"

namespace mtsmt::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::uint64_t>;

NgramCounts ngram_counts(const Sentence& s, int n) {
  NgramCounts out;
  if (static_cast<int>(s.size()) < n) return out;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= s.size(); ++i)
    ++out[std::vector<std::string>(s.begin() + static_cast<long>(i),
                                   s.begin() + static_cast<long>(i + static_cast<std::size_t>(n)))];
  return out;
}

void check_sizes(const std::vector<Sentence>& hyps,
                 const std::vector<Refs>& refs) {
  if (hyps.empty()) throw Error("evaluation: empty hypothesis set");
  if (hyps.size() != refs.size())
    throw Error("evaluation: " + std::to_string(hyps.size()) +
                " hypotheses vs " + std::to_string(refs.size()) +
                " reference rows");
  for (const auto& r : refs)
    if (r.empty()) throw Error("evaluation: a hypothesis has no reference");
}

}  // namespace

// --- BLEU ---

double bleu(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs,
            int max_n) {
  check_sizes(hyps, refs);
  std::vector<double> matched(static_cast<std::size_t>(max_n), 0.0);
  std::vector<double> total(static_cast<std::size_t>(max_n), 0.0);
  double hyp_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const Sentence& hyp = hyps[s];
    hyp_len += static_cast<double>(hyp.size());
    // Closest reference length; ties to the shorter one.
    std::size_t closest = refs[s][0].size();
    for (const Sentence& ref : refs[s]) {
      const auto d_new = ref.size() > hyp.size() ? ref.size() - hyp.size()
                                                 : hyp.size() - ref.size();
      const auto d_old = closest > hyp.size() ? closest - hyp.size()
                                              : hyp.size() - closest;
      if (d_new < d_old || (d_new == d_old && ref.size() < closest))
        closest = ref.size();
    }
    ref_len += static_cast<double>(closest);
    for (int n = 1; n <= max_n; ++n) {
      const NgramCounts hyp_counts = ngram_counts(hyp, n);
      NgramCounts ref_max;
      for (const Sentence& ref : refs[s])
        for (const auto& [g, c] : ngram_counts(ref, n))
          ref_max[g] = std::max(ref_max[g], c);
      for (const auto& [g, c] : hyp_counts) {
        total[static_cast<std::size_t>(n - 1)] += static_cast<double>(c);
        auto it = ref_max.find(g);
        if (it != ref_max.end())
          matched[static_cast<std::size_t>(n - 1)] +=
              static_cast<double>(std::min(c, it->second));
      }
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_precision = 0.0;
  int orders = 0;
  for (int n = 1; n <= max_n; ++n) {
    if (total[static_cast<std::size_t>(n - 1)] == 0) continue;  // no candidates at this order
    if (matched[static_cast<std::size_t>(n - 1)] == 0) return 0.0;
    log_precision += std::log(matched[static_cast<std::size_t>(n - 1)] /
                              total[static_cast<std::size_t>(n - 1)]);
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_precision / orders);
}

// --- NIST ---

double nist(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs,
            int max_n) {
  check_sizes(hyps, refs);
  // Information weights from reference counts pooled over the whole corpus.
  std::vector<NgramCounts> pooled(static_cast<std::size_t>(max_n));
  double pooled_tokens = 0;
  for (const auto& r : refs)
    for (const Sentence& ref : r) {
      pooled_tokens += static_cast<double>(ref.size());
      for (int n = 1; n <= max_n; ++n)
        for (const auto& [g, c] : ngram_counts(ref, n))
          pooled[static_cast<std::size_t>(n - 1)][g] += c;
    }
  auto info = [&](const std::vector<std::string>& g) {
    const auto full = pooled[g.size() - 1].find(g)->second;
    double prefix;
    if (g.size() == 1) {
      prefix = pooled_tokens;
    } else {
      std::vector<std::string> p(g.begin(), g.end() - 1);
      prefix = static_cast<double>(pooled[g.size() - 2].find(p)->second);
    }
    return std::log2(prefix / static_cast<double>(full));
  };

  std::vector<double> info_sum(static_cast<std::size_t>(max_n), 0.0);
  std::vector<double> candidates(static_cast<std::size_t>(max_n), 0.0);
  double hyp_len = 0, mean_ref_len = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    hyp_len += static_cast<double>(hyps[s].size());
    double rl = 0;
    for (const Sentence& ref : refs[s]) rl += static_cast<double>(ref.size());
    mean_ref_len += rl / static_cast<double>(refs[s].size());
    for (int n = 1; n <= max_n; ++n) {
      NgramCounts ref_max;
      for (const Sentence& ref : refs[s])
        for (const auto& [g, c] : ngram_counts(ref, n))
          ref_max[g] = std::max(ref_max[g], c);
      for (const auto& [g, c] : ngram_counts(hyps[s], n)) {
        candidates[static_cast<std::size_t>(n - 1)] += static_cast<double>(c);
        auto it = ref_max.find(g);
        if (it == ref_max.end()) continue;
        const std::uint64_t m = std::min(c, it->second);
        info_sum[static_cast<std::size_t>(n - 1)] +=
            static_cast<double>(m) * info(g);
      }
    }
  }
  double score = 0.0;
  for (int n = 1; n <= max_n; ++n)
    if (candidates[static_cast<std::size_t>(n - 1)] > 0)
      score += info_sum[static_cast<std::size_t>(n - 1)] /
               candidates[static_cast<std::size_t>(n - 1)];
  if (hyp_len == 0 || mean_ref_len == 0) return 0.0;
  // Brevity factor 0.5 at a length ratio of 2/3.
  static const double kBeta =
      std::log(0.5) / (std::log(2.0 / 3.0) * std::log(2.0 / 3.0));
  const double ratio = std::min(hyp_len / mean_ref_len, 1.0);
  const double lr = std::log(ratio);
  return score * std::exp(kBeta * lr * lr);
}

// --- METEOR ---

namespace {

// One-to-one matching for one stage: hypothesis words are scanned left to
// right and take the candidate position that continues the current chunk
// when possible, then the leftmost one after the previous match, then the
// leftmost overall. Matches per surface form are maximal by construction.
void match_stage(const std::vector<std::string>& hyp_keys,
                 const std::vector<std::string>& ref_keys,
                 std::vector<int>& hyp_to_ref, std::vector<char>& ref_used) {
  std::unordered_map<std::string, std::vector<int>> ref_positions;
  for (int j = 0; j < static_cast<int>(ref_keys.size()); ++j)
    if (!ref_used[static_cast<std::size_t>(j)])
      ref_positions[ref_keys[static_cast<std::size_t>(j)]].push_back(j);
  int last = -1;
  for (int i = 0; i < static_cast<int>(hyp_keys.size()); ++i) {
    if (hyp_to_ref[static_cast<std::size_t>(i)] >= 0) {
      last = hyp_to_ref[static_cast<std::size_t>(i)];
      continue;
    }
    auto it = ref_positions.find(hyp_keys[static_cast<std::size_t>(i)]);
    if (it == ref_positions.end() || it->second.empty()) continue;
    std::vector<int>& cands = it->second;
    int chosen_idx = -1;
    for (std::size_t k = 0; k < cands.size(); ++k)
      if (cands[k] == last + 1) {
        chosen_idx = static_cast<int>(k);
        break;
      }
    if (chosen_idx < 0)
      for (std::size_t k = 0; k < cands.size(); ++k)
        if (cands[k] > last) {
          chosen_idx = static_cast<int>(k);
          break;
        }
    if (chosen_idx < 0) chosen_idx = 0;
    const int j = cands[static_cast<std::size_t>(chosen_idx)];
    hyp_to_ref[static_cast<std::size_t>(i)] = j;
    ref_used[static_cast<std::size_t>(j)] = 1;
    cands.erase(cands.begin() + chosen_idx);
    last = j;
  }
}

}  // namespace

MeteorStats meteor_stats(const Sentence& hyp, const Sentence& ref,
                         std::size_t stem_k) {
  MeteorStats st;
  st.hyp_len = static_cast<double>(hyp.size());
  st.ref_len = static_cast<double>(ref.size());
  std::vector<int> hyp_to_ref(hyp.size(), -1);
  std::vector<char> ref_used(ref.size(), 0);
  // Stage 1: exact matches. Stage 2: stem matches on what remains.
  match_stage(hyp, ref, hyp_to_ref, ref_used);
  std::vector<std::string> hyp_stems(hyp.size()), ref_stems(ref.size());
  for (std::size_t i = 0; i < hyp.size(); ++i) hyp_stems[i] = stem(hyp[i], stem_k);
  for (std::size_t j = 0; j < ref.size(); ++j) ref_stems[j] = stem(ref[j], stem_k);
  match_stage(hyp_stems, ref_stems, hyp_to_ref, ref_used);

  int prev_i = -2, prev_j = -2;
  for (int i = 0; i < static_cast<int>(hyp.size()); ++i) {
    const int j = hyp_to_ref[static_cast<std::size_t>(i)];
    if (j < 0) continue;
    st.matches += 1;
    if (i != prev_i + 1 || j != prev_j + 1) st.chunks += 1;
    prev_i = i;
    prev_j = j;
  }
  return st;
}

double meteor_from_stats(const MeteorStats& s) {
  if (s.matches == 0 || s.hyp_len == 0 || s.ref_len == 0) return 0.0;
  const double p = s.matches / s.hyp_len;
  const double r = s.matches / s.ref_len;
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = s.chunks / s.matches;
  const double penalty = 0.5 * frag * frag * frag;
  return 100.0 * fmean * (1.0 - penalty);
}

double meteor(const Sentence& hyp, const Sentence& ref, std::size_t stem_k) {
  return meteor_from_stats(meteor_stats(hyp, ref, stem_k));
}

double meteor(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs,
              std::size_t stem_k) {
  check_sizes(hyps, refs);
  MeteorStats total;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    MeteorStats best;
    double best_score = -1;
    for (const Sentence& ref : refs[s]) {
      const MeteorStats st = meteor_stats(hyps[s], ref, stem_k);
      const double score = meteor_from_stats(st);
      if (score > best_score) {
        best_score = score;
        best = st;
      }
    }
    total.matches += best.matches;
    total.hyp_len += best.hyp_len;
    total.ref_len += best.ref_len;
    total.chunks += best.chunks;
  }
  return meteor_from_stats(total);
}

// --- TER ---

namespace {

int edit_distance(const Sentence& a, const Sentence& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[m];
}

// Alignment path: herr[i] marks hypothesis words not exactly matched;
// ralign[r] gives the hypothesis index aligned with reference position r.
void align_path(const Sentence& hyp, const Sentence& ref,
                std::vector<char>& herr, std::vector<int>& ralign) {
  const std::size_t n = hyp.size(), m = ref.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1)});
  herr.assign(n, 1);
  ralign.assign(m, 0);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1)) {
      ralign[j - 1] = static_cast<int>(i - 1);
      if (hyp[i - 1] == ref[j - 1]) herr[i - 1] = 0;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      --i;  // hyp word inserted; herr stays set
    } else {
      ralign[j - 1] = static_cast<int>(i > 0 ? i - 1 : 0);
      --j;  // ref word missing from hyp
    }
  }
}

constexpr std::size_t kMaxShiftLen = 10;

}  // namespace

TerStats ter_stats(const Sentence& hyp, const Sentence& ref) {
  if (ref.empty()) throw Error("TER: empty reference");
  TerStats st;
  st.ref_len = static_cast<double>(ref.size());
  Sentence cur = hyp;
  int dist = edit_distance(cur, ref);
  int shifts = 0;
  while (dist > 0 && !cur.empty()) {
    std::vector<char> herr;
    std::vector<int> ralign;
    align_path(cur, ref, herr, ralign);
    int best_delta = 0;
    Sentence best;
    for (std::size_t b = 0; b < cur.size(); ++b) {
      for (std::size_t e = b + 1; e <= std::min(cur.size(), b + kMaxShiftLen);
           ++e) {
        // The block must be misaligned where it stands.
        bool misaligned = false;
        for (std::size_t i = b; i < e && !misaligned; ++i)
          if (herr[i]) misaligned = true;
        if (!misaligned) continue;
        const std::size_t len = e - b;
        for (std::size_t r = 0; r + len <= ref.size(); ++r) {
          if (!std::equal(cur.begin() + static_cast<long>(b),
                          cur.begin() + static_cast<long>(e),
                          ref.begin() + static_cast<long>(r)))
            continue;
          // Land the block at the hypothesis position aligned with r.
          const std::size_t dest = static_cast<std::size_t>(ralign[r]);
          if (dest >= b && dest < e) continue;
          Sentence moved;
          moved.reserve(cur.size());
          const std::size_t pos = dest < b ? dest : dest - len + 1;
          for (std::size_t i = 0; i < cur.size(); ++i)
            if (i < b || i >= e) moved.push_back(cur[i]);
          if (pos > moved.size()) continue;
          moved.insert(moved.begin() + static_cast<long>(pos),
                       cur.begin() + static_cast<long>(b),
                       cur.begin() + static_cast<long>(e));
          const int nd = edit_distance(moved, ref);
          if (dist - nd > best_delta) {
            best_delta = dist - nd;
            best = std::move(moved);
          }
        }
      }
    }
    if (best_delta <= 0) break;
    cur = std::move(best);
    dist -= best_delta;
    ++shifts;
  }
  st.edits = static_cast<double>(dist + shifts);
  return st;
}

double ter(const Sentence& hyp, const Sentence& ref) {
  const TerStats st = ter_stats(hyp, ref);
  return 100.0 * st.edits / st.ref_len;
}

double ter(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs) {
  check_sizes(hyps, refs);
  double edits = 0, ref_len = 0;
  std::vector<TerStats> per_sentence(hyps.size());
  parallel_blocks(hyps.size(), 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      TerStats best;
      double best_rate = -1;
      for (const Sentence& ref : refs[s]) {
        const TerStats st = ter_stats(hyps[s], ref);
        const double rate = st.edits / st.ref_len;
        if (best_rate < 0 || rate < best_rate) {
          best_rate = rate;
          best = st;
        }
      }
      per_sentence[s] = best;
    }
  });
  for (const TerStats& st : per_sentence) {
    edits += st.edits;
    ref_len += st.ref_len;
  }
  return 100.0 * edits / ref_len;
}

// --- RIBES ---

namespace {

// One-to-one correspondence from hypothesis words to reference positions:
// unique words match directly, ambiguous ones are resolved by growing a
// unigram context window until exactly one candidate survives on either
// side. Unmatched words are skipped.
std::vector<int> ribes_matches(const Sentence& hyp, const Sentence& ref) {
  std::unordered_map<std::string, std::vector<int>> ref_pos, hyp_pos;
  for (int j = 0; j < static_cast<int>(ref.size()); ++j)
    ref_pos[ref[static_cast<std::size_t>(j)]].push_back(j);
  for (int i = 0; i < static_cast<int>(hyp.size()); ++i)
    hyp_pos[hyp[static_cast<std::size_t>(i)]].push_back(i);

  std::vector<int> matched;
  const int hn = static_cast<int>(hyp.size());
  for (int i = 0; i < hn; ++i) {
    auto rit = ref_pos.find(hyp[static_cast<std::size_t>(i)]);
    if (rit == ref_pos.end()) continue;
    const std::vector<int>& rm = rit->second;
    const std::vector<int>& hm = hyp_pos[hyp[static_cast<std::size_t>(i)]];
    if (rm.size() == 1 && hm.size() == 1) {
      matched.push_back(rm[0]);
      continue;
    }
    std::vector<int> lr = rm, lh = hm, rr = rm, rh = hm;
    for (int window = 1; window < std::max(i + 1, hn - i); ++window) {
      if (window <= i) {
        std::vector<int> nlr, nlh;
        for (int j : lr)
          if (window <= j &&
              ref[static_cast<std::size_t>(j - window)] ==
                  hyp[static_cast<std::size_t>(i - window)])
            nlr.push_back(j);
        for (int j : lh)
          if (window <= j &&
              hyp[static_cast<std::size_t>(j - window)] ==
                  hyp[static_cast<std::size_t>(i - window)])
            nlh.push_back(j);
        if (nlr.size() == 1 && nlh.size() == 1) {
          matched.push_back(nlr[0]);
          break;
        }
        lr = std::move(nlr);
        lh = std::move(nlh);
      }
      if (i + window < hn) {
        std::vector<int> nrr, nrh;
        for (int j : rr)
          if (j + window < static_cast<int>(ref.size()) &&
              ref[static_cast<std::size_t>(j + window)] ==
                  hyp[static_cast<std::size_t>(i + window)])
            nrr.push_back(j);
        for (int j : rh)
          if (j + window < hn && hyp[static_cast<std::size_t>(j + window)] ==
                                     hyp[static_cast<std::size_t>(i + window)])
            nrh.push_back(j);
        if (nrr.size() == 1 && nrh.size() == 1) {
          matched.push_back(nrr[0]);
          break;
        }
        rr = std::move(nrr);
        rh = std::move(nrh);
      }
    }
  }
  return matched;
}

}  // namespace

double ribes(const Sentence& hyp, const Sentence& ref, double alpha,
             double beta, RankCorrelation corr) {
  if (ref.empty()) throw Error("RIBES: empty reference");
  if (hyp.empty()) return 0.0;
  const double bp = std::min(
      1.0, std::exp(1.0 - static_cast<double>(ref.size()) /
                              static_cast<double>(hyp.size())));
  const std::vector<int> matched = ribes_matches(hyp, ref);
  const int n = static_cast<int>(matched.size());
  double nkt, precision;
  if (n == 1 && ref.size() == 1) {
    nkt = 1.0;
    precision = 1.0 / static_cast<double>(hyp.size());
  } else if (n < 2) {
    return 0.0;
  } else {
    if (corr == RankCorrelation::kendall) {
      // Kendall's tau (concordant minus discordant over all pairs), clamped
      // at zero: identical order scores 1, fully reversed scores 0.
      int concordant = 0;
      for (int i = 0; i < n - 1; ++i)
        for (int j = i + 1; j < n; ++j)
          if (matched[static_cast<std::size_t>(i)] <
              matched[static_cast<std::size_t>(j)])
            ++concordant;
      const double total = static_cast<double>(n * (n - 1) / 2);
      nkt = std::max(0.0, (2.0 * concordant - total) / total);
    } else {
      // Ranks of the matched reference positions; (rho + 1) / 2.
      std::vector<int> sorted = matched;
      std::sort(sorted.begin(), sorted.end());
      double d2 = 0;
      for (int i = 0; i < n; ++i) {
        const auto rank = static_cast<int>(
            std::lower_bound(sorted.begin(), sorted.end(),
                             matched[static_cast<std::size_t>(i)]) -
            sorted.begin());
        d2 += static_cast<double>((rank - i) * (rank - i));
      }
      const double rho =
          1.0 - 6.0 * d2 / (static_cast<double>(n) *
                            (static_cast<double>(n) * n - 1.0));
      nkt = (rho + 1.0) / 2.0;
    }
    precision = static_cast<double>(n) / static_cast<double>(hyp.size());
  }
  return 100.0 * nkt * std::pow(precision, alpha) * std::pow(bp, beta);
}

double ribes(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs,
             double alpha, double beta, RankCorrelation corr) {
  check_sizes(hyps, refs);
  double sum = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    double best = 0;
    for (const Sentence& ref : refs[s])
      best = std::max(best, ribes(hyps[s], ref, alpha, beta, corr));
    sum += best;
  }
  return sum / static_cast<double>(hyps.size());
}

// --- combined report ---

namespace {

EvaluationReport evaluate_impl(const std::vector<Sentence>& hyps,
                               const std::vector<Refs>& refs,
                               const EvaluateOptions& opts) {
  EvaluationReport r;
  r.bleu = bleu(hyps, refs, opts.bleu_max_n);
  r.nist = nist(hyps, refs, opts.nist_max_n);
  r.meteor = meteor(hyps, refs, opts.stem_k);
  r.ribes = ribes(hyps, refs, 0.25, 0.10, opts.ribes_corr);
  r.ter = ter(hyps, refs);
  return r;
}

std::vector<Sentence> lowercase_all(const std::vector<Sentence>& in) {
  std::vector<Sentence> out = in;
  for (auto& s : out)
    for (auto& t : s) t = utf8::lower_copy(t);
  return out;
}

}  // namespace

EvaluationReport evaluate(const std::vector<Sentence>& hyps,
                          const std::vector<Refs>& refs,
                          const EvaluateOptions& opts) {
  if (!opts.lowercase) return evaluate_impl(hyps, refs, opts);
  std::vector<Refs> lrefs = refs;
  for (auto& r : lrefs) r = lowercase_all(r);
  return evaluate_impl(lowercase_all(hyps), lrefs, opts);
}

EvaluationReport evaluate_serial(const std::vector<Sentence>& hyps,
                                 const std::vector<Refs>& refs,
                                 const EvaluateOptions& opts) {
  // The only parallel kernel in the suite is the per-sentence TER loop;
  // recompute it serially and splice it into the report.
  EvaluationReport r = evaluate(hyps, refs, opts);
  std::vector<Sentence> h = opts.lowercase ? lowercase_all(hyps) : hyps;
  std::vector<Refs> rr = refs;
  if (opts.lowercase)
    for (auto& x : rr) x = lowercase_all(x);
  double edits = 0, ref_len = 0;
  for (std::size_t s = 0; s < h.size(); ++s) {
    TerStats best;
    double best_rate = -1;
    for (const Sentence& ref : rr[s]) {
      const TerStats st = ter_stats(h[s], ref);
      const double rate = st.edits / st.ref_len;
      if (best_rate < 0 || rate < best_rate) {
        best_rate = rate;
        best = st;
      }
    }
    edits += best.edits;
    ref_len += best.ref_len;
  }
  r.ter = 100.0 * edits / ref_len;
  return r;
}

EvaluationReport evaluate_files(const std::string& hyp_path,
                                const std::vector<std::string>& ref_paths,
                                const EvaluateOptions& opts) {
  const auto hyp_lines = read_lines(hyp_path);
  std::vector<std::vector<std::string>> ref_lines;
  for (const auto& p : ref_paths) {
    ref_lines.push_back(read_lines(p));
    if (ref_lines.back().size() != hyp_lines.size())
      throw Error("line count mismatch: " + hyp_path + " has " +
                  std::to_string(hyp_lines.size()) + " lines, " + p + " has " +
                  std::to_string(ref_lines.back().size()));
  }
  std::vector<Sentence> hyps;
  std::vector<Refs> refs;
  for (std::size_t i = 0; i < hyp_lines.size(); ++i) {
    hyps.push_back(split_ws(hyp_lines[i]));
    Refs r;
    for (const auto& rl : ref_lines) r.push_back(split_ws(rl[i]));
    refs.push_back(std::move(r));
  }
  return evaluate(hyps, refs, opts);
}

std::string report_header() { return "BLEU\tNIST\tMETEOR\tRIBES\tTER"; }

std::string report_row(const EvaluationReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.2f\t%.2f\t%.2f\t%.2f\t%.2f", r.bleu,
                r.nist, r.meteor, r.ribes, r.ter);
  return buf;
}

}  // namespace mtsmt::metrics
