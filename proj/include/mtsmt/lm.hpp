#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtsmt/corpus.hpp"

// Backoff n-gram language models with interpolated Kneser-Ney and
// Witten-Bell smoothing, stored ARPA-style: log10 probabilities plus log10
// backoff weights. Sentences are padded with one begin marker (context
// only, never predicted) and one end marker (predicted). The predicted
// vocabulary is every training word plus the end and unknown markers; for
// every stored history the distribution over it sums to 1.

namespace mtsmt::lm {

using WordId = std::uint32_t;
inline constexpr WordId kUnk = 0;
inline constexpr WordId kBos = 1;
inline constexpr WordId kEos = 2;

inline constexpr const char* kUnkSurface = "<unk>";
inline constexpr const char* kBosSurface = "<s>";
inline constexpr const char* kEosSurface = "</s>";

using Gram = std::vector<WordId>;

struct GramHash {
  std::size_t operator()(const Gram& g) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (WordId w : g) {
      for (int b = 0; b < 4; ++b) {
        h ^= (w >> (8 * b)) & 0xFF;
        h *= 0x100000001b3ULL;
      }
    }
    return static_cast<std::size_t>(h);
  }
};

template <typename T>
using GramMap = std::unordered_map<Gram, T, GramHash>;

class LmVocab {
 public:
  LmVocab();
  WordId add(const std::string& w);           // interning
  WordId lookup(const std::string& w) const;  // OOV -> kUnk
  const std::string& surface(WordId id) const { return surfaces_[id]; }
  std::size_t size() const { return surfaces_.size(); }

 private:
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::string> surfaces_;
};

struct NGramCounts {
  int order = 0;
  LmVocab vocab;
  // counts[k-1]: raw k-gram counts over padded sentences.
  std::vector<GramMap<std::uint64_t>> counts;
  // continuation[k-1] for k < order: distinct left-context types of each
  // k-gram.
  std::vector<GramMap<std::uint64_t>> continuation;
};

// OpenMP block counting with ordered merge; count_ngrams_serial is the
// reference path and must produce identical maps.
NGramCounts count_ngrams(const std::vector<Sentence>& side, int order = 5);
NGramCounts count_ngrams_serial(const std::vector<Sentence>& side, int order = 5);

enum class Smoothing { kneser_ney_interpolated, witten_bell };

struct NGramEntry {
  double logprob = 0.0;        // log10
  double backoff = 0.0;        // log10, valid when has_backoff
  bool has_backoff = false;
};

struct NGramModel {
  int order = 0;
  Smoothing smoothing = Smoothing::kneser_ney_interpolated;
  LmVocab vocab;
  std::vector<GramMap<NGramEntry>> table;  // [k-1]: k-gram entries
  std::vector<std::string> warnings;       // e.g. KN fallback notes

  // Backoff-chain query; history is truncated to the most recent order-1
  // ids by the caller-facing helpers below.
  double logprob_ids(std::span<const WordId> history, WordId word) const;
  double logprob(const std::vector<std::string>& history,
                 const std::string& word) const;

  std::size_t predicted_vocab_size() const;  // excludes <s>
};

// Single discount per order D = n1/(n1+2*n2); highest order uses raw
// counts, lower orders continuation counts (raw for grams starting with the
// begin marker, which have no left context). Orders whose counts-of-counts
// are degenerate (n1 or n2 zero) fall back to Witten-Bell with a warning.
// Words with a raw unigram count below unk_floor are pooled into <unk>
// before estimation; the default of 1 pools nothing.
NGramModel estimate_kneser_ney(const NGramCounts& counts,
                               std::uint64_t unk_floor = 1);

// Recursive Witten-Bell: lambda_h = c(h)/(c(h)+T(h)) against the next
// lower order, grounded in a uniform distribution over the predicted
// vocabulary.
NGramModel estimate_witten_bell(const NGramCounts& counts);

double perplexity(const NGramModel& model, const std::vector<Sentence>& side);

void serialize(const NGramModel& model, const std::string& path);
NGramModel deserialize(const std::string& path);

void export_arpa(const NGramModel& model, const std::string& path);

}  // namespace mtsmt::lm
