#pragma once

// Deterministic synthetic parallel corpus with a bijective phrase lexicon
// and controlled local reordering: determiner-noun units stay monotone,
// adjective-noun units swap, preposition units rotate three blocks. Knobs
// add the phenomena the individual pipeline toggles react to: casing and
// typographic punctuation, morphological variants that share a 6-character
// stem, context-dependent homonyms, and rare compound tokens.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mtsmt/corpus.hpp"

namespace synthetic {

struct Options {
  std::size_t pairs = 2000;
  std::uint64_t seed = 42;
  bool casing_noise = false;
  bool morphology = false;
  bool homonyms = false;
  bool compounds = false;
};

struct Unit {
  std::vector<std::string> src;
  std::vector<std::string> tgt;
};

namespace detail {

inline std::string two(std::size_t i) {
  std::string s = std::to_string(i);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace detail

// A corpus plus the true source-unit segmentation of every sentence, which
// the acceptance suite uses for its derivability check.
struct Corpus {
  mtsmt::ParallelCorpus parallel;
  std::vector<std::vector<Unit>> units;
};

inline Corpus make(const Options& opt) {
  using detail::two;
  std::mt19937_64 rng(opt.seed);
  auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  const std::size_t n_nouns = 40, n_adjs = 12, n_verbs = 10, n_dets = 6,
                    n_preps = 6, n_homs = 6;

  auto noun = [&](std::size_t i) {
    std::string base = "noun" + two(i);
    if (opt.morphology) base += pick(2) ? "a" : "b";  // same 6-char stem
    return std::pair<std::string, std::string>(base, "tn" + two(i));
  };
  auto adj = [&](std::size_t i) {
    return std::pair<std::string, std::string>("adj" + two(i), "ta" + two(i));
  };
  auto verb = [&](std::size_t i) {
    return std::pair<std::string, std::string>("verb" + two(i), "tv" + two(i));
  };
  auto det = [&](std::size_t i) {
    return std::pair<std::string, std::string>("det" + two(i), "td" + two(i));
  };
  auto prep = [&](std::size_t i) {
    return std::pair<std::string, std::string>("prep" + two(i), "tp" + two(i));
  };

  Corpus out;
  out.parallel.source_lang = "src";
  out.parallel.target_lang = "tgt";
  for (std::size_t p = 0; p < opt.pairs; ++p) {
    std::vector<Unit> units;
    const std::size_t n_units = 2 + pick(4);
    for (std::size_t u = 0; u < n_units; ++u) {
      const std::size_t kind = pick(10);
      Unit unit;
      if (kind < 3) {  // determiner + noun, monotone
        const auto [ds, dt] = det(pick(n_dets));
        const auto [ns, nt] = noun(pick(n_nouns));
        unit.src = {ds, ns};
        unit.tgt = {dt, nt};
      } else if (kind < 6) {  // adjective + noun, swapped in the target
        const auto [as, at] = adj(pick(n_adjs));
        const auto [ns, nt] = noun(pick(n_nouns));
        unit.src = {as, ns};
        unit.tgt = {nt, at};
      } else if (kind < 8) {  // verb, monotone
        const auto [vs, vt] = verb(pick(n_verbs));
        unit.src = {vs};
        unit.tgt = {vt};
      } else if (kind == 8) {  // preposition + noun + adjective, reversed
        const auto [ps, pt] = prep(pick(n_preps));
        const auto [ns, nt] = noun(pick(n_nouns));
        const auto [as, at] = adj(pick(n_adjs));
        unit.src = {ps, ns, as};
        unit.tgt = {at, nt, pt};
      } else if (opt.homonyms && pick(2) == 0) {
        // Homonym: sense A after a determiner, sense B elsewhere.
        const std::size_t h = pick(n_homs);
        if (pick(2) == 0) {
          const auto [ds, dt] = det(pick(n_dets));
          unit.src = {ds, "hom" + two(h)};
          unit.tgt = {dt, "sa" + two(h)};
        } else {
          unit.src = {"hom" + two(h)};
          unit.tgt = {"sb" + two(h)};
        }
      } else {  // plain noun
        const auto [ns, nt] = noun(pick(n_nouns));
        unit.src = {ns};
        unit.tgt = {nt};
      }
      units.push_back(std::move(unit));
    }
    // Rare compounds: two verb surfaces glued together, translated as the
    // two verb targets. Kept rare so most types stay out of the table.
    if (opt.compounds && pick(50) == 0) {
      const std::size_t v1 = pick(n_verbs), v2 = pick(n_verbs);
      Unit unit;
      unit.src = {"verb" + two(v1) + "verb" + two(v2)};
      unit.tgt = {"tv" + two(v1), "tv" + two(v2)};
      units.push_back(std::move(unit));
    }

    mtsmt::SentencePair pair;
    pair.line_number = p + 1;
    for (const auto& u : units) {
      pair.source.insert(pair.source.end(), u.src.begin(), u.src.end());
      pair.target.insert(pair.target.end(), u.tgt.begin(), u.tgt.end());
    }
    if (opt.casing_noise) {
      // Occasional capitalized noun mid-sentence plus typographic quotes.
      if (pick(12) == 0 && !pair.source.empty()) {
        const std::size_t i = pick(pair.source.size());
        pair.source[i][0] =
            static_cast<char>(std::toupper(pair.source[i][0]));
      }
      if (pick(12) == 0) {
        pair.source.push_back("„quoted”");
        pair.target.push_back("„quoted”");
      }
    }
    out.units.push_back(std::move(units));
    out.parallel.pairs.push_back(std::move(pair));
  }
  return out;
}

inline void write(const Corpus& corpus, const std::string& src_path,
                  const std::string& tgt_path) {
  mtsmt::write_corpus(src_path, tgt_path, corpus.parallel);
}

}  // namespace synthetic
