#pragma once

#include <string>
#include <vector>

#include "mtsmt/corpus.hpp"

// The five-metric evaluation suite: BLEU, NIST, METEOR (exact + stem stages,
// no synonym/paraphrase matching), TER (greedy block shifts + edit distance)
// and RIBES (rank correlation over one-to-one word matches). Corpus scores
// aggregate per-sentence statistics; per-sentence work parallelizes and the
// aggregation order is fixed, so results do not depend on thread count.

namespace mtsmt::metrics {

using Refs = std::vector<Sentence>;  // all references for one hypothesis

// Corpus BLEU in [0,100]: clipped n-gram precisions pooled over the corpus,
// uniform-weight geometric mean over orders that have candidates, brevity
// penalty from summed closest-reference lengths. 0 if any pooled precision
// is zero.
double bleu(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs,
            int max_n = 4);

// NIST with information weights from pooled reference counts and the
// squared-log brevity factor calibrated to 0.5 at length ratio 2/3.
double nist(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs,
            int max_n = 5);

struct MeteorStats {
  double matches = 0, hyp_len = 0, ref_len = 0, chunks = 0;
};

MeteorStats meteor_stats(const Sentence& hyp, const Sentence& ref,
                         std::size_t stem_k = 6);
double meteor_from_stats(const MeteorStats& s);  // [0,100]
double meteor(const Sentence& hyp, const Sentence& ref, std::size_t stem_k = 6);
// Corpus METEOR: best reference per sentence, statistics aggregated before
// the final Fmean/penalty formula.
double meteor(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs,
              std::size_t stem_k = 6);

struct TerStats {
  double edits = 0;    // shifts + insertions + deletions + substitutions
  double ref_len = 0;
};

TerStats ter_stats(const Sentence& hyp, const Sentence& ref);
double ter(const Sentence& hyp, const Sentence& ref);  // percentage
// Corpus TER: minimum edit rate reference per sentence; total edits over
// total chosen reference length.
double ter(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs);

enum class RankCorrelation { kendall, spearman };

double ribes(const Sentence& hyp, const Sentence& ref, double alpha = 0.25,
             double beta = 0.10,
             RankCorrelation corr = RankCorrelation::kendall);
// Corpus RIBES: mean over sentences of the best per-reference score.
double ribes(const std::vector<Sentence>& hyps, const std::vector<Refs>& refs,
             double alpha = 0.25, double beta = 0.10,
             RankCorrelation corr = RankCorrelation::kendall);

struct EvaluationReport {
  double bleu = 0;
  double nist = 0;
  double meteor = 0;
  double ribes = 0;
  double ter = 0;
};

struct EvaluateOptions {
  bool lowercase = true;
  int bleu_max_n = 4;
  int nist_max_n = 5;
  std::size_t stem_k = 6;
  RankCorrelation ribes_corr = RankCorrelation::kendall;
};

EvaluationReport evaluate(const std::vector<Sentence>& hyps,
                          const std::vector<Refs>& refs,
                          const EvaluateOptions& opts = {});
// Reference path without OpenMP, kept for tests and the benchmark.
EvaluationReport evaluate_serial(const std::vector<Sentence>& hyps,
                                 const std::vector<Refs>& refs,
                                 const EvaluateOptions& opts = {});

// Loads hypothesis/reference files (one sentence per line, whitespace
// tokens); errors if line counts differ.
EvaluationReport evaluate_files(const std::string& hyp_path,
                                const std::vector<std::string>& ref_paths,
                                const EvaluateOptions& opts = {});

// Tab-separated, two decimals, Table 2/3 column order:
// BLEU NIST METEOR RIBES TER.
std::string report_header();
std::string report_row(const EvaluationReport& r);

}  // namespace mtsmt::metrics
