#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtsmt/lm.hpp"
#include "mtsmt/metrics.hpp"
#include "mtsmt/phrase.hpp"

// Stack-based beam-search decoding over a log-linear model: four phrase
// features, language model, linear distortion, word and OOV penalties, and
// optional lexicalized reordering. Plus a grid coordinate-ascent weight
// tuner on corpus BLEU.

namespace mtsmt::decode {

struct Weights {
  std::map<std::string, double> values;

  double get(const std::string& name) const;
  void set(const std::string& name, double v) { values[name] = v; }

  // phi/lex features 0.2, lm 0.5, distortion 0.3, word_penalty 0,
  // oov_penalty 1, reordering buckets 0.3 when a scheme is given.
  static Weights defaults(
      std::optional<phrase::ReorderingScheme> scheme = std::nullopt);

  void save(const std::string& path) const;  // name<TAB>value per line
  static Weights load(const std::string& path);
};

// Feature names for the reordering buckets, e.g. reo_prev_mono.
std::vector<std::string> reordering_feature_names(phrase::ReorderingScheme s);

struct DecoderConfig {
  int beam_size = 100;
  int distortion_limit = 6;  // 0 = monotone
  int max_phrase_len = 7;
};

struct Option {
  int src_begin = 0, src_end = 0;
  Sentence tgt;
  phrase::PhraseFeatures features;  // probabilities
  bool oov = false;
};

// All applicable phrase options, plus verbatim copy-through options for
// positions no table entry covers. Sorted by span, then target tokens.
std::vector<Option> collect_options(const Sentence& sentence,
                                    const phrase::PhraseTable& table,
                                    const DecoderConfig& config);

struct DerivationStep {
  int src_begin = 0, src_end = 0;
  Sentence tgt;
  phrase::PhraseFeatures features;
  bool oov = false;
};

struct DecodeResult {
  Sentence translation;
  std::vector<DerivationStep> derivation;
  double score = 0;
  bool fallback = false;  // no complete hypothesis; monotone copy-through
};

struct Models {
  const phrase::PhraseTable* table = nullptr;
  const lm::NGramModel* lm = nullptr;
  const phrase::ReorderingModel* reordering = nullptr;  // optional
};

DecodeResult decode(const Sentence& sentence, const Models& models,
                    const Weights& weights, const DecoderConfig& config = {});

struct FeatureBreakdown {
  std::map<std::string, double> h;  // raw feature values
  double total = 0;                 // sum of weight * h
};

// Independent re-scoring of a derivation; equals the decoder's internal
// score for the same derivation within 1e-9.
FeatureBreakdown score_derivation(const Sentence& sentence,
                                  const std::vector<DerivationStep>& derivation,
                                  const Models& models, const Weights& weights);

std::vector<DecodeResult> decode_corpus(const std::vector<Sentence>& sentences,
                                        const Models& models,
                                        const Weights& weights,
                                        const DecoderConfig& config = {});
std::vector<DecodeResult> decode_corpus_serial(
    const std::vector<Sentence>& sentences, const Models& models,
    const Weights& weights, const DecoderConfig& config = {});

struct TuneConfig {
  int restarts = 8;
  int iterations = 30;  // coordinate-ascent passes per restart
  std::uint64_t seed = 1;
  DecoderConfig decoder;
};

// Coordinate ascent on dev-set corpus BLEU over the multiplier grid
// {0.25, 0.5, 0.8, 1, 1.25, 2, 4}; zero-valued weights probe the fixed set
// {-2, -1, -0.5, -0.25, 0.25, 0.5, 1, 2}. Restarts perturb the initial
// weights with a seeded generator. Never returns weights scoring below the
// initial ones.
Weights tune_weights(const std::vector<Sentence>& dev_src,
                     const std::vector<metrics::Refs>& dev_refs,
                     const Models& models, const Weights& initial,
                     const TuneConfig& config = {});

}  // namespace mtsmt::decode
