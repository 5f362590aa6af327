// Times the OpenMP kernels against their serial reference implementations
// on a synthetic bijective-lexicon corpus and checks they agree.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "mtsmt/align.hpp"
#include "mtsmt/corpus.hpp"
#include "mtsmt/decode.hpp"
#include "mtsmt/lm.hpp"
#include "mtsmt/metrics.hpp"
#include "mtsmt/phrase.hpp"

using namespace mtsmt;

namespace {

ParallelCorpus make_corpus(std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t vocab = 200;
  ParallelCorpus corpus;
  corpus.source_lang = "src";
  corpus.target_lang = "tgt";
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t len = 4 + rng() % 9;
    SentencePair pair;
    pair.line_number = p + 1;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t w = rng() % vocab;
      pair.source.push_back("s" + std::to_string(w));
      pair.target.push_back("t" + std::to_string(w));
    }
    // Local swap so alignments and reordering are not purely diagonal.
    if (len >= 2 && rng() % 4 == 0)
      std::swap(pair.target[0], pair.target[1]);
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

template <typename Fn>
double time_of(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void row(const std::string& name, double serial, double parallel, bool equal) {
  std::printf("%-18s %10.3fs %10.3fs %8.2fx   %s\n", name.c_str(), serial,
              parallel, parallel > 0 ? serial / parallel : 0.0,
              equal ? "outputs match" : "OUTPUTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mtsmt-bench: serial reference vs OpenMP kernels"};
  std::size_t pairs = 3000;
  std::uint64_t seed = 7;
  app.add_option("--pairs", pairs, "Synthetic corpus size");
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serially\n");
#endif
  const ParallelCorpus corpus = make_corpus(pairs, seed);
  std::vector<Sentence> tgt_side;
  for (const auto& p : corpus.pairs) tgt_side.push_back(p.target);
  std::printf("corpus: %zu pairs\n\n", corpus.pairs.size());
  std::printf("%-18s %11s %11s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    lm::NGramCounts a, b;
    const double ts = time_of([&] { a = lm::count_ngrams_serial(tgt_side, 5); });
    const double tp = time_of([&] { b = lm::count_ngrams(tgt_side, 5); });
    bool equal = a.order == b.order;
    for (int k = 0; equal && k < a.order; ++k)
      equal = a.counts[static_cast<std::size_t>(k)] ==
              b.counts[static_cast<std::size_t>(k)];
    row("ngram-count", ts, tp, equal);
  }

  align::LexicalTable serial_table, parallel_table;
  {
    const double ts = time_of(
        [&] { serial_table = align::train_model1_serial(corpus, 3); });
    const double tp =
        time_of([&] { parallel_table = align::train_model1(corpus, 3); });
    bool equal = serial_table.rows.size() == parallel_table.rows.size();
    for (std::size_t r = 0; equal && r < serial_table.rows.size(); ++r)
      equal = serial_table.rows[r] == parallel_table.rows[r];
    row("model1-em", ts, tp, equal);
  }

  align::TrainedAligner aligner;
  aligner.config.heuristic = align::Heuristic::grow_diag_final_and;
  aligner.forward = serial_table;
  aligner.backward = align::train_model1(
      [&] {
        ParallelCorpus sw;
        sw.source_lang = corpus.target_lang;
        sw.target_lang = corpus.source_lang;
        for (const auto& p : corpus.pairs)
          sw.pairs.push_back({p.target, p.source, p.line_number});
        return sw;
      }(),
      3);
  std::vector<align::AlignmentLinks> links;
  {
    std::vector<align::AlignmentLinks> a, b;
    const double ts =
        time_of([&] { a = align::align_corpus_serial(aligner, corpus); });
    const double tp = time_of([&] { b = align::align_corpus(aligner, corpus); });
    row("viterbi-align", ts, tp, a == b);
    links = std::move(b);
  }

  std::vector<phrase::ExtractedPhrase> extracted;
  {
    std::vector<phrase::ExtractedPhrase> a, b;
    const double ts =
        time_of([&] { a = phrase::extract_corpus_serial(corpus, links); });
    const double tp = time_of([&] { b = phrase::extract_corpus(corpus, links); });
    bool equal = a.size() == b.size();
    for (std::size_t i = 0; equal && i < a.size(); ++i)
      equal = a[i].src == b[i].src && a[i].tgt == b[i].tgt;
    row("phrase-extract", ts, tp, equal);
    extracted = std::move(b);
  }

  const phrase::PhraseTable table =
      phrase::score_phrase_table(extracted, aligner.forward, aligner.backward);
  const lm::NGramModel lmodel =
      lm::estimate_kneser_ney(lm::count_ngrams(tgt_side, 3));
  const decode::Models models{&table, &lmodel, nullptr};
  const decode::Weights weights = decode::Weights::defaults();
  std::vector<Sentence> inputs;
  for (std::size_t i = 0; i < std::min<std::size_t>(300, corpus.pairs.size()); ++i)
    inputs.push_back(corpus.pairs[i].source);
  std::vector<decode::DecodeResult> decoded;
  {
    std::vector<decode::DecodeResult> a, b;
    decode::DecoderConfig config;
    config.beam_size = 50;
    const double ts = time_of(
        [&] { a = decode::decode_corpus_serial(inputs, models, weights, config); });
    const double tp =
        time_of([&] { b = decode::decode_corpus(inputs, models, weights, config); });
    bool equal = a.size() == b.size();
    for (std::size_t i = 0; equal && i < a.size(); ++i)
      equal = a[i].translation == b[i].translation && a[i].score == b[i].score;
    row("decode", ts, tp, equal);
    decoded = std::move(b);
  }

  {
    std::vector<Sentence> hyps;
    std::vector<metrics::Refs> refs;
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      hyps.push_back(decoded[i].translation);
      refs.push_back({corpus.pairs[i].target});
    }
    metrics::EvaluationReport a, b;
    const double ts = time_of([&] { a = metrics::evaluate_serial(hyps, refs); });
    const double tp = time_of([&] { b = metrics::evaluate(hyps, refs); });
    const bool equal = a.bleu == b.bleu && a.nist == b.nist &&
                       a.meteor == b.meteor && a.ribes == b.ribes &&
                       a.ter == b.ter;
    row("evaluate", ts, tp, equal);
  }
  return 0;
}
