#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "mtsmt/common.hpp"
#include "mtsmt/decode.hpp"
#include "mtsmt/error.hpp"
#include "support/decode_oracle.hpp"

using namespace mtsmt;
using decode::DecoderConfig;
using decode::Models;
using decode::Weights;

namespace {

lm::NGramModel tiny_lm(const std::vector<Sentence>& side, int order = 2) {
  return lm::estimate_kneser_ney(lm::count_ngrams(side, order));
}

phrase::PhraseTable table_of(
    std::initializer_list<std::tuple<const char*, const char*, double>> rows) {
  phrase::PhraseTable t;
  for (const auto& [src, tgt, phi] : rows) {
    phrase::PhraseFeatures f{phi, phi, phi, phi};
    t.add(split_ws(src), split_ws(tgt), f);
  }
  return t;
}

}  // namespace

TEST_CASE("one-word sentence with a single table entry") {
  const auto table = table_of({{"a", "x", 1.0}});
  const auto lmod = tiny_lm({{"x"}});
  const Models models{&table, &lmod, nullptr};
  const auto r = decode::decode(split_ws("a"), models, Weights::defaults());
  CHECK(r.translation == split_ws("x"));
  CHECK(r.derivation.size() == 1);
  CHECK_FALSE(r.fallback);
}

TEST_CASE("two-word sentence equals the exhaustive argmax") {
  const auto table = table_of({{"a", "x", 0.6}, {"b", "y", 0.6}, {"a b", "z", 0.5}});
  const auto lmod = tiny_lm({{"x", "y"}, {"z"}});
  const Models models{&table, &lmod, nullptr};
  DecoderConfig config;
  config.beam_size = 1000;
  for (double phrase_weight : {0.2, 2.0}) {
    Weights w = Weights::defaults();
    w.set("phi_fe", phrase_weight);
    w.set("phi_ef", phrase_weight);
    const auto got = decode::decode(split_ws("a b"), models, w, config);
    const auto want =
        decode_oracle::best_derivation(split_ws("a b"), models, w, config);
    REQUIRE(want.found);
    CHECK(got.score == doctest::Approx(want.score).epsilon(1e-9));
    CHECK(got.translation == want.output);
  }
}

TEST_CASE("distortion limit zero forces monotone order") {
  // Each source word has exactly one translation, and the language model
  // wants them in swapped order; only the free-order decode can reach it.
  const auto table = table_of({{"a", "u", 0.9}, {"b", "v", 0.9}});
  std::vector<Sentence> lm_corpus;
  for (int i = 0; i < 50; ++i) lm_corpus.push_back(split_ws("v u"));
  const auto lmod = tiny_lm(lm_corpus);
  const Models models{&table, &lmod, nullptr};
  Weights w = Weights::defaults();
  w.set("lm", 2.0);
  DecoderConfig free_order;
  free_order.beam_size = 500;
  free_order.distortion_limit = 6;
  DecoderConfig monotone = free_order;
  monotone.distortion_limit = 0;
  const auto swapped = decode::decode(split_ws("a b"), models, w, free_order);
  const auto straight = decode::decode(split_ws("a b"), models, w, monotone);
  CHECK(swapped.translation == split_ws("v u"));
  CHECK(straight.translation == split_ws("u v"));
  // Both match their exhaustive optima.
  CHECK(swapped.score ==
        doctest::Approx(decode_oracle::best_derivation(split_ws("a b"), models,
                                                       w, free_order)
                            .score)
            .epsilon(1e-9));
  CHECK(straight.score ==
        doctest::Approx(decode_oracle::best_derivation(split_ws("a b"), models,
                                                       w, monotone)
                            .score)
            .epsilon(1e-9));
}

namespace {

struct RandomInstance {
  Sentence sentence;
  phrase::PhraseTable table;
  lm::NGramModel lm;
  phrase::ReorderingModel reordering;
  bool use_reordering = false;
  Weights weights;
  DecoderConfig config;
};

RandomInstance random_instance(std::mt19937_64& rng) {
  RandomInstance inst;
  const char* src_words[] = {"s0", "s1", "s2", "s3"};
  const char* tgt_words[] = {"t0", "t1", "t2", "t3", "t4", "t5"};
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  const int n = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i)
    inst.sentence.push_back(src_words[rng() % 4]);
  // Random table over the sentence's contiguous subsequences; roughly half
  // the positions keep coverage so OOV copy-through also gets exercised.
  const int entries = 1 + static_cast<int>(rng() % 12);
  for (int k = 0; k < entries; ++k) {
    const int b = static_cast<int>(rng() % static_cast<unsigned>(n));
    const int len = 1 + static_cast<int>(rng() % 2);
    if (b + len > n) continue;
    Sentence src(inst.sentence.begin() + b, inst.sentence.begin() + b + len);
    Sentence tgt;
    for (int t = 0; t < 1 + static_cast<int>(rng() % 2); ++t)
      tgt.push_back(tgt_words[rng() % 6]);
    phrase::PhraseFeatures f{0.05 + 0.95 * uniform(), 0.05 + 0.95 * uniform(),
                             0.05 + 0.95 * uniform(), 0.05 + 0.95 * uniform()};
    inst.table.add(src, tgt, f);
  }
  std::vector<Sentence> lm_corpus;
  for (int i = 0; i < 6; ++i) {
    Sentence s;
    for (int k = 0; k < 2 + static_cast<int>(rng() % 5); ++k)
      s.push_back(tgt_words[rng() % 6]);
    lm_corpus.push_back(s);
  }
  inst.lm = lm::estimate_kneser_ney(lm::count_ngrams(lm_corpus, 2));
  inst.use_reordering = rng() % 2 == 0;
  if (inst.use_reordering) {
    const auto scheme = rng() % 2 ? phrase::ReorderingScheme::msd_bidirectional
                                  : phrase::ReorderingScheme::hier_mslr_bidirectional;
    std::vector<phrase::OrientationEvent> events;
    for (const auto& [src, options] : inst.table.entries())
      for (const auto& o : options)
        events.push_back({src, join(o.tgt), rng() % 2 == 0,
                          static_cast<phrase::Orientation>(
                              rng() % static_cast<unsigned>(
                                          phrase::orientation_arity(scheme)))});
    inst.reordering = phrase::estimate_reordering(events, scheme, 0.5);
    inst.weights = Weights::defaults(scheme);
  } else {
    inst.weights = Weights::defaults();
  }
  for (auto& [name, v] : inst.weights.values) v = -1.5 + 3.0 * uniform();
  const int limits[] = {0, 1, 6};
  inst.config.beam_size = 100000;  // full beam: nothing is pruned
  inst.config.distortion_limit = limits[rng() % 3];
  return inst;
}

}  // namespace

TEST_CASE("decoder equals exhaustive enumeration on random instances") {
  std::mt19937_64 rng(606);
  int decoded = 0;
  for (int trial = 0; trial < 60; ++trial) {
    RandomInstance inst = random_instance(rng);
    Models models{&inst.table, &inst.lm,
                  inst.use_reordering ? &inst.reordering : nullptr};
    const auto want = decode_oracle::best_derivation(inst.sentence, models,
                                                     inst.weights, inst.config);
    const auto got =
        decode::decode(inst.sentence, models, inst.weights, inst.config);
    if (!want.found) {
      CHECK(got.fallback);
      continue;
    }
    ++decoded;
    REQUIRE_FALSE(got.fallback);
    CHECK(got.score == doctest::Approx(want.score).epsilon(1e-9));
    CHECK(got.translation == want.output);
    REQUIRE(got.derivation.size() == want.derivation.size());
    for (std::size_t i = 0; i < got.derivation.size(); ++i) {
      CHECK(got.derivation[i].src_begin == want.derivation[i].src_begin);
      CHECK(got.derivation[i].src_end == want.derivation[i].src_end);
      CHECK(got.derivation[i].tgt == want.derivation[i].tgt);
    }
    // The reported score is re-derivable from the derivation.
    const double rescored =
        decode::score_derivation(inst.sentence, got.derivation, models,
                                 inst.weights)
            .total;
    CHECK(got.score == doctest::Approx(rescored).epsilon(1e-9));
  }
  CHECK(decoded > 20);  // most instances are solvable
}

TEST_CASE("wider beams never lower the best score") {
  std::mt19937_64 rng(707);
  for (int trial = 0; trial < 15; ++trial) {
    RandomInstance inst = random_instance(rng);
    Models models{&inst.table, &inst.lm,
                  inst.use_reordering ? &inst.reordering : nullptr};
    double last = -1e30;
    for (int beam : {1, 2, 5, 20, 1000}) {
      DecoderConfig c = inst.config;
      c.beam_size = beam;
      const auto r = decode::decode(inst.sentence, models, inst.weights, c);
      if (r.fallback) continue;
      CHECK(r.score >= last - 1e-9);
      last = std::max(last, r.score);
    }
  }
}

TEST_CASE("scaling all weights by a positive constant keeps the argmax") {
  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 10; ++trial) {
    RandomInstance inst = random_instance(rng);
    Models models{&inst.table, &inst.lm,
                  inst.use_reordering ? &inst.reordering : nullptr};
    const auto base =
        decode::decode(inst.sentence, models, inst.weights, inst.config);
    Weights scaled = inst.weights;
    for (auto& [name, v] : scaled.values) v *= 3.5;
    const auto after = decode::decode(inst.sentence, models, scaled, inst.config);
    CHECK(after.translation == base.translation);
    CHECK(after.score == doctest::Approx(3.5 * base.score).epsilon(1e-9));
  }
}

TEST_CASE("every output token comes from the table or an OOV copy") {
  std::mt19937_64 rng(909);
  for (int trial = 0; trial < 20; ++trial) {
    RandomInstance inst = random_instance(rng);
    Models models{&inst.table, &inst.lm,
                  inst.use_reordering ? &inst.reordering : nullptr};
    const auto r = decode::decode(inst.sentence, models, inst.weights, inst.config);
    for (const auto& step : r.derivation) {
      if (step.oov) {
        REQUIRE(step.tgt.size() == 1);
        CHECK(step.tgt[0] ==
              inst.sentence[static_cast<std::size_t>(step.src_begin)]);
      } else {
        Sentence src(inst.sentence.begin() + step.src_begin,
                     inst.sentence.begin() + step.src_end);
        const auto* opts = inst.table.lookup(src);
        REQUIRE(opts);
        bool found = false;
        for (const auto& o : *opts) found = found || o.tgt == step.tgt;
        CHECK(found);
      }
    }
  }
}

TEST_CASE("uncoverable sentences fall back to copy-through") {
  // Positions 0..2 are covered only by overlapping two-word phrases, so no
  // complete derivation exists and the decoder must fall back.
  const auto table = table_of({{"a b", "x", 0.9}, {"b c", "y", 0.9}});
  const auto lmod = tiny_lm({{"x"}, {"y"}});
  const Models models{&table, &lmod, nullptr};
  const auto r = decode::decode(split_ws("a b c"), models, Weights::defaults());
  CHECK(r.fallback);
  CHECK(r.translation == split_ws("a b c"));
  CHECK(r.derivation.size() == 3);
}

TEST_CASE("score_derivation: zero weights, linearity, hand-computed sum") {
  const auto table = table_of({{"a", "x", 0.5}, {"b", "y", 0.25}});
  const auto lmod = tiny_lm({{"x", "y"}});
  const Models models{&table, &lmod, nullptr};
  std::vector<decode::DerivationStep> steps{
      {0, 1, split_ws("x"), {0.5, 0.5, 0.5, 0.5}, false},
      {1, 2, split_ws("y"), {0.25, 0.25, 0.25, 0.25}, false}};
  const Sentence src = split_ws("a b");

  Weights zero;
  CHECK(decode::score_derivation(src, steps, models, zero).total == 0.0);

  Weights w = Weights::defaults();
  const auto base = decode::score_derivation(src, steps, models, w);
  Weights w2 = w;
  w2.set("lm", 2.0 * w.get("lm"));
  const auto doubled = decode::score_derivation(src, steps, models, w2);
  CHECK(doubled.total - base.total ==
        doctest::Approx(w.get("lm") * base.h.at("lm")).epsilon(1e-9));

  // Hand computation: phrase features, LM chain, no distortion, two words.
  const double lm_sum = lmod.logprob({"<s>"}, "x") + lmod.logprob({"<s>", "x"}, "y") +
                        lmod.logprob({"x", "y"}, "</s>");
  const double expect = w.get("phi_fe") * (std::log10(0.5) + std::log10(0.25)) +
                        w.get("lex_fe") * (std::log10(0.5) + std::log10(0.25)) +
                        w.get("phi_ef") * (std::log10(0.5) + std::log10(0.25)) +
                        w.get("lex_ef") * (std::log10(0.5) + std::log10(0.25)) +
                        w.get("lm") * lm_sum + w.get("word_penalty") * 2.0;
  CHECK(base.total == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("weights files round trip and defaults include reordering buckets") {
  Weights w = Weights::defaults(phrase::ReorderingScheme::hier_mslr_bidirectional);
  CHECK(w.values.count("reo_prev_disc_left"));
  CHECK(w.values.count("reo_next_disc_right"));
  CHECK(decode::reordering_feature_names(
            phrase::ReorderingScheme::msd_bidirectional)
            .size() == 6);
  w.set("lm", 1.25);
  const std::string path = "weights_roundtrip.txt";
  w.save(path);
  const Weights loaded = Weights::load(path);
  CHECK(loaded.values == w.values);
  std::filesystem::remove(path);
}

TEST_CASE("decode_corpus parallel equals the serial reference") {
  std::mt19937_64 rng(111);
  RandomInstance inst = random_instance(rng);
  inst.config.beam_size = 50;
  Models models{&inst.table, &inst.lm,
                inst.use_reordering ? &inst.reordering : nullptr};
  std::vector<Sentence> sentences;
  for (int i = 0; i < 100; ++i) {
    Sentence s;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 4); ++k)
      s.push_back("s" + std::to_string(rng() % 4));
    sentences.push_back(s);
  }
  const auto a = decode::decode_corpus(sentences, models, inst.weights, inst.config);
  const auto b =
      decode::decode_corpus_serial(sentences, models, inst.weights, inst.config);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].translation == b[i].translation);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("tuning improves a fixable word-order error and is deterministic") {
  const auto table = table_of({{"a", "y", 0.9}, {"a", "x", 0.1},
                               {"b", "x", 0.9}, {"b", "y", 0.1}});
  std::vector<Sentence> lm_corpus;
  for (int i = 0; i < 50; ++i) lm_corpus.push_back(split_ws("x y"));
  const auto lmod = tiny_lm(lm_corpus);
  const Models models{&table, &lmod, nullptr};
  Weights initial = Weights::defaults();
  initial.set("lm", 0.0);

  const std::vector<Sentence> dev_src{split_ws("a b"), split_ws("a b")};
  const std::vector<metrics::Refs> dev_refs{{split_ws("x y")}, {split_ws("x y")}};

  auto bleu_with = [&](const Weights& w) {
    const auto results = decode::decode_corpus(dev_src, models, w, {});
    std::vector<Sentence> hyps;
    for (const auto& r : results) hyps.push_back(r.translation);
    return metrics::bleu(hyps, dev_refs);
  };
  const double before = bleu_with(initial);

  decode::TuneConfig tc;
  tc.restarts = 2;
  tc.iterations = 3;
  tc.seed = 9;
  const Weights tuned = decode::tune_weights(dev_src, dev_refs, models, initial, tc);
  const double after = bleu_with(tuned);
  CHECK(after > before);
  CHECK(after == doctest::Approx(100.0).epsilon(1e-9));

  // Same seed, same result; tuning never returns something worse.
  const Weights again = decode::tune_weights(dev_src, dev_refs, models, initial, tc);
  CHECK(again.values == tuned.values);

  // Perfect starting weights come back unchanged.
  Weights perfect = tuned;
  const Weights kept = decode::tune_weights(dev_src, dev_refs, models, perfect,
                                            {1, 1, 5, {}});
  CHECK(bleu_with(kept) == doctest::Approx(100.0).epsilon(1e-9));
}
