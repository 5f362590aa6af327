#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtsmt/metrics.hpp"

// Experiment management: parses flat key=value configs, chains the pipeline
// (prepare -> lm -> align -> phrase -> tune -> decode -> score) with a
// content-hash stage cache, and formats score tables. Each toggle mirrors
// one pipeline variation; config keys for techniques this toolkit does not
// implement are rejected with an explanatory error.

namespace mtsmt::harness {

struct ExperimentConfig {
  std::string id = "exp";
  std::string corpus_src;
  std::string corpus_tgt;
  std::string source_lang = "pl";
  std::string target_lang = "en";
  bool reverse_direction = false;  // translate target -> source instead

  // Pipeline toggles, each one published experiment variation.
  bool truecase = false;        // truecasing + punctuation normalization
  std::size_t stem_align_k = 0; // stemmed word alignment; 0 = off
  bool fast_align = false;      // diagonal-prior aligner instead of Model 1
  bool witten_bell = false;     // LM smoothing instead of Kneser-Ney
  bool hier_mslr = false;       // hierarchical MSLR reordering instead of MSD
  bool compound_split = false;  // geometric-mean compound splitting

  int lm_order = 5;
  std::uint64_t seed = 1;
  int beam = 100;
  int distortion = 6;
  std::size_t n_dev = 1000;
  std::size_t n_test = 1000;
  std::size_t max_len = 80;
  double max_ratio = 9.0;
  int max_phrase_len = 7;
  int align_iterations = 5;
  bool tune = false;
  int tune_restarts = 2;
  int tune_iterations = 2;

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse(const std::vector<std::string>& lines,
                                const std::string& origin);

  // Canonical key=value form used for stage hashing.
  std::string canonical() const;
};

struct StageArtifact {
  std::string stage;
  std::string hash;  // 16 hex chars over inputs + upstream hashes
  std::vector<std::string> outputs;
  double seconds = 0;
  bool cached = false;
};

struct RunResult {
  metrics::EvaluationReport report;
  std::vector<StageArtifact> manifest;
};

// Executes all stages under cache_dir; a stage re-runs exactly when its
// input hash has no finished cache entry. Stage failures abort with the
// stage name; partial artifacts stay on disk for inspection.
RunResult run_experiment(const ExperimentConfig& config,
                         const std::string& cache_dir);

void write_manifest(const ExperimentConfig& config, const RunResult& result,
                    const std::string& path);

struct SuiteRow {
  std::string id;
  bool ok = false;
  std::string error;
  metrics::EvaluationReport report;
};

std::vector<SuiteRow> run_suite(const std::vector<ExperimentConfig>& configs,
                                const std::string& cache_dir);

// Table 2/3-shaped score table: one row per experiment in config order,
// two decimals, plus a BLEU delta against the first (baseline) row.
std::string format_suite_table(const std::vector<SuiteRow>& rows);

// --- OPUS EMEA download (optional; needs network) ---

struct FetchResult {
  std::string src_path;
  std::string tgt_path;
  std::size_t line_count = 0;
  std::string release;  // e.g. "v3"
};

// Validates the pair code before any network use.
std::string emea_url(const std::string& pair);

// Downloads the Moses-format release for the pair, extracts it, verifies
// that both sides have equal line counts and records the release version.
FetchResult fetch_emea(const std::string& target_dir, const std::string& pair);

// Minimal zip extraction with CRC verification (stored and deflate
// entries); exposed separately so it is testable offline.
std::vector<std::string> unzip_to(const std::string& zip_path,
                                  const std::string& out_dir);

}  // namespace mtsmt::harness
