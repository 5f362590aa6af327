#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtsmt/utf8.hpp"

// Parallel-corpus preparation: tokenization, punctuation normalization,
// length/ratio/noise filtering, truecasing, deterministic dev/test splits
// and corpus statistics. Input convention is one sentence per line, two
// files of equal line count per language pair.

namespace mtsmt {

using Token = std::string;               // non-empty, no internal whitespace
using Sentence = std::vector<Token>;     // non-empty once stored

struct SentencePair {
  Sentence source;
  Sentence target;
  std::size_t line_number = 0;  // 1-based provenance
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
  std::string source_lang;
  std::string target_lang;
};

class Vocabulary {
 public:
  // Dense 0-based ids in first-occurrence order.
  std::uint32_t add(const Token& t);
  std::optional<std::uint32_t> id_of(const Token& t) const;
  std::uint64_t count_of(const Token& t) const;
  const Token& surface(std::uint32_t id) const { return surfaces_[id]; }
  std::size_t size() const { return surfaces_.size(); }
  std::uint64_t total_count() const { return total_; }

 private:
  std::unordered_map<Token, std::uint32_t> ids_;
  std::vector<Token> surfaces_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

Vocabulary build_vocabulary(const std::vector<Sentence>& side);

struct TruecaseModel {
  // lowercased form -> most frequent cased form (ties: lexicographically
  // smallest cased form).
  std::map<std::string, std::string> best_form;
  std::map<std::string, std::uint64_t> counts;  // cased form -> count

  void save(const std::string& path) const;
  static TruecaseModel load(const std::string& path);
};

// --- cleaning decisions ---

enum class DropReason { kept, too_long, empty, ratio, noise };

const char* drop_reason_name(DropReason r);

struct CleanDecision {
  bool keep;
  DropReason reason;
};

// --- operations ---

// Splits punctuation into single-character tokens; keeps '-' and '\''
// attached when both neighbours are word characters; collapses whitespace.
// May return an empty sentence (caller drops the line).
Sentence tokenize(std::string_view text, const std::string& lang = "");

// Typographic quotes -> ASCII quotes, dashes -> '-', ellipsis -> "...",
// no-break space -> space. Idempotent.
std::string normalize_punctuation(std::string_view text);

// max_ratio <= 0 disables the ratio filter.
CleanDecision clean_pair(const SentencePair& pair, std::size_t max_len = 80,
                         double max_ratio = 9.0);

// Drop when the fraction of characters that are neither common
// (punctuation/digits/symbols) nor in an allowed script exceeds threshold.
CleanDecision filter_noise(const Sentence& sentence,
                           const std::vector<utf8::Script>& allowed_scripts,
                           double threshold = 0.2);

// Counts cased variants at non-initial positions. A sentence-initial token
// is counted only when it is already lowercase; capitalized sentence starts
// carry no casing information.
TruecaseModel train_truecaser(const std::vector<Sentence>& side);

// Changes at most the first token: best known form, else lowercased.
Sentence truecase(const Sentence& sentence, const TruecaseModel& model);

struct SplitResult {
  ParallelCorpus train, dev, test;
};

// Seeded partial Fisher-Yates over pair indices (mt19937_64, modulo draw);
// the first n_dev draws become dev, the next n_test test. All three parts
// keep original corpus order. Identical seeds give identical splits.
SplitResult split_corpus(const ParallelCorpus& corpus, std::size_t n_dev = 1000,
                         std::size_t n_test = 1000, std::uint64_t seed = 1);

struct CorpusStats {
  std::size_t sentences = 0;
  std::uint64_t source_tokens = 0;
  std::uint64_t target_tokens = 0;
  std::size_t source_vocab = 0;
  std::size_t target_vocab = 0;
};

CorpusStats corpus_stats(const ParallelCorpus& corpus);

// Lowercased first k code points.
std::string stem(const Token& token, std::size_t k = 6);

// --- file I/O ---

// Loads two one-sentence-per-line files of equal length; whitespace
// tokenization (input is expected to be pre-tokenized). Drops pairs where
// either side is empty, recording them in drop_log as "<line>\t<reason>".
ParallelCorpus load_parallel(const std::string& src_path,
                             const std::string& tgt_path,
                             std::vector<std::string>* drop_log = nullptr);

std::vector<Sentence> load_side(const std::string& path);

void write_side(const std::string& path, const std::vector<Sentence>& side);
void write_corpus(const std::string& src_path, const std::string& tgt_path,
                  const ParallelCorpus& corpus);

}  // namespace mtsmt
