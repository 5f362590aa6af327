#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtsmt/corpus.hpp"

// Word alignment: IBM Model 1 and a fast-align style reparametrized Model 2,
// Viterbi alignment in both directions, and the grow-diag-final family of
// symmetrization heuristics.
//
// Convention: the lexical table conditions on the target side and generates
// source words, t(f|e) with a null token on the conditioning side. The
// forward direction aligns each source word to its best conditioning target
// word (or null = no link); the backward direction swaps the pair's sides
// before aligning and swaps link coordinates after.

namespace mtsmt::align {

struct Link {
  int src = 0;
  int tgt = 0;
  friend auto operator<=>(const Link&, const Link&) = default;
};

struct AlignmentLinks {
  std::vector<Link> links;  // sorted, unique (set semantics)
  int source_len = 0;
  int target_len = 0;

  void insert(Link l);
  bool contains(Link l) const;
  bool operator==(const AlignmentLinks&) const = default;
};

inline constexpr double kFloorProb = 1e-12;  // unseen word pairs at align time
inline constexpr std::uint32_t kNullWord = 0;

class AlignVocab {
 public:
  AlignVocab() { add("<null>"); }
  std::uint32_t add(const std::string& w);
  std::optional<std::uint32_t> id_of(const std::string& w) const;
  const std::string& surface(std::uint32_t id) const { return surfaces_[id]; }
  std::size_t size() const { return surfaces_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> surfaces_;
};

// t(generated | conditioning); rows (fixed conditioning word) sum to 1.
struct LexicalTable {
  AlignVocab cond_vocab;  // target side + <null>
  AlignVocab gen_vocab;   // source side (<null> id unused here)
  // row index = conditioning id; each row maps generated id -> prob.
  std::vector<std::unordered_map<std::uint32_t, double>> rows;

  double prob(std::uint32_t cond, std::uint32_t gen) const;
  double prob_surface(const std::string& cond, const std::string& gen) const;
};

struct FastAlignParams {
  LexicalTable lex;
  double tension = 4.0;   // lambda > 0
  double p_null = 0.08;   // probability of the null conditioner
};

enum class Heuristic {
  intersection,
  union_all,
  grow,
  grow_diag,
  grow_diag_final,
  grow_diag_final_and,
};

Heuristic heuristic_from_name(const std::string& name);  // e.g. "grow-diag-final-and"
const char* heuristic_name(Heuristic h);

struct TrainStats {
  std::vector<double> log_likelihood;  // one entry per EM iteration
};

// Plain EM with uniform initialization over co-occurring pairs (plus null);
// log-likelihood is non-decreasing across iterations. The OpenMP E-step
// accumulates per-block expected counts merged in block order, so results
// are identical for any thread count; *_serial is the reference loop.
LexicalTable train_model1(const ParallelCorpus& corpus, int iterations = 5,
                          TrainStats* stats = nullptr);
LexicalTable train_model1_serial(const ParallelCorpus& corpus, int iterations = 5,
                                 TrainStats* stats = nullptr);

// Model 2 with the diagonal prior exp(-lambda * |i/m - j/n|) over
// conditioning positions, null handled by p_null. optimize_tension runs 8
// gradient steps on lambda per EM iteration.
FastAlignParams train_fast_align(const ParallelCorpus& corpus, int iterations = 5,
                                 bool optimize_tension = false,
                                 double initial_tension = 4.0,
                                 double p_null = 0.08,
                                 TrainStats* stats = nullptr);

enum class Direction { forward, backward };

// Each generated-side word links to the conditioning position with the
// maximum posterior, or to null (no link). Ties go to null first, then to
// the smaller position index.
AlignmentLinks viterbi_align(const LexicalTable& table, const SentencePair& pair,
                             Direction dir);
AlignmentLinks viterbi_align(const FastAlignParams& params,
                             const SentencePair& pair, Direction dir);

// The published procedure: start from the intersection, grow to fixpoint by
// adding union points adjacent to an existing point (4-neighbourhood for
// grow, 8 for the diag variants; diagonal neighbours are scanned first)
// whose source or target word is still unaligned, then a final pass over
// remaining union points in row-major order requiring one unaligned end
// (grow_diag_final) or both (grow_diag_final_and).
AlignmentLinks symmetrize(const AlignmentLinks& forward,
                          const AlignmentLinks& backward, Heuristic heuristic);

struct AlignerConfig {
  enum class Kind { model1, fast_align } kind = Kind::model1;
  int iterations = 5;
  bool optimize_tension = false;
  Heuristic heuristic = Heuristic::grow_diag_final_and;
  std::size_t stem_k = 0;  // 0 = align on surface forms
};

struct TrainedAligner {
  AlignerConfig config;
  // Forward conditions on the target side, backward on the source side.
  LexicalTable forward;
  LexicalTable backward;
  double fwd_tension = 4.0, bwd_tension = 4.0;
  double p_null = 0.08;

  void save(const std::string& path) const;
  static TrainedAligner load(const std::string& path);
};

TrainedAligner train_aligner(const ParallelCorpus& corpus, const AlignerConfig& cfg);

// Viterbi in both directions plus symmetrization for every pair. When
// stem_k is set in the aligner config, both sides are stemmed before
// lookup; link indices always refer to the original token positions.
std::vector<AlignmentLinks> align_corpus(const TrainedAligner& aligner,
                                         const ParallelCorpus& corpus);
std::vector<AlignmentLinks> align_corpus_serial(const TrainedAligner& aligner,
                                                const ParallelCorpus& corpus);

// One-shot pipeline: train + align.
std::vector<AlignmentLinks> align_corpus(const ParallelCorpus& corpus,
                                         const AlignerConfig& cfg);

// Pharaoh format: space-separated "i-j" with the source index first.
std::string to_pharaoh(const AlignmentLinks& links);
AlignmentLinks from_pharaoh(const std::string& line, int source_len,
                            int target_len);

}  // namespace mtsmt::align
