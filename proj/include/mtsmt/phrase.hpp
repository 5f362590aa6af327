#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtsmt/align.hpp"
#include "mtsmt/corpus.hpp"

// Phrase-table construction: alignment-consistent phrase extraction, Moses
// style four-feature scoring, lexicalized reordering models (word-based MSD
// and hierarchical MSLR, both bidirectional) and geometric-mean compound
// splitting.

namespace mtsmt::phrase {

using align::AlignmentLinks;
using align::Link;

struct SpanPair {
  int src_begin = 0, src_end = 0;  // [begin, end)
  int tgt_begin = 0, tgt_end = 0;
  friend auto operator<=>(const SpanPair&, const SpanPair&) = default;
};

struct PhraseInstance {
  SpanPair span;
  std::vector<Link> links;  // links inside the box, phrase-relative, sorted
};

// Exactly the consistent boxes: every link touching either span falls
// inside, at least one link inside, both spans at most max_len long.
// Unaligned boundary words extend boxes in the usual way.
std::vector<PhraseInstance> extract_phrases(const SentencePair& pair,
                                            const AlignmentLinks& alignment,
                                            int max_len = 7);

struct ExtractedPhrase {
  Sentence src;
  Sentence tgt;
  std::vector<Link> links;
};

std::vector<ExtractedPhrase> extract_corpus(
    const ParallelCorpus& corpus, const std::vector<AlignmentLinks>& alignments,
    int max_len = 7);
std::vector<ExtractedPhrase> extract_corpus_serial(
    const ParallelCorpus& corpus, const std::vector<AlignmentLinks>& alignments,
    int max_len = 7);

struct PhraseFeatures {
  double phi_fe = 0;  // phi(f|e)
  double lex_fe = 0;  // lex(f|e)
  double phi_ef = 0;  // phi(e|f)
  double lex_ef = 0;  // lex(e|f)
};

struct TargetOption {
  Sentence tgt;
  PhraseFeatures features;
};

class PhraseTable {
 public:
  void add(const Sentence& src, const Sentence& tgt, PhraseFeatures f);
  // Options sorted by target phrase; empty when the source phrase is absent.
  const std::vector<TargetOption>* lookup(const Sentence& src) const;
  std::size_t size() const;
  int max_source_len() const { return max_source_len_; }

  // One entry per line: src ||| tgt ||| phi_f_e lex_f_e phi_e_f lex_e_f
  void save(const std::string& path) const;
  static PhraseTable load(const std::string& path);

  const std::map<std::string, std::vector<TargetOption>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::vector<TargetOption>> entries_;
  int max_source_len_ = 0;
};

// Relative-frequency phi features plus lexical weights computed from the
// most frequent internal alignment of each phrase pair (ties: smallest link
// set lexicographically). lex_fwd is t(src|tgt), lex_bwd t(tgt|src). When
// the tables come from a stemmed aligner, pass its stem_k so lookups stem
// the surface forms the same way.
PhraseTable score_phrase_table(const std::vector<ExtractedPhrase>& extracted,
                               const align::LexicalTable& lex_fwd,
                               const align::LexicalTable& lex_bwd,
                               std::size_t stem_k = 0);

// --- lexicalized reordering ---

enum class ReorderingScheme { msd_bidirectional, hier_mslr_bidirectional };

ReorderingScheme scheme_from_name(const std::string& name);  // "msd" | "hier-mslr"
const char* scheme_name(ReorderingScheme s);

enum class Orientation : int {
  monotone = 0,
  swap = 1,
  discontinuous = 2,        // msd only
  discontinuous_left = 2,   // hier-mslr
  discontinuous_right = 3,  // hier-mslr
};

int orientation_arity(ReorderingScheme s);  // 3 for msd, 4 for hier-mslr

// Orientation of the later phrase relative to the earlier block, both given
// as source-side intervals of target-adjacent instances. Throws when the
// source spans overlap.
Orientation classify_orientation(const SpanPair& earlier, const SpanPair& later,
                                 ReorderingScheme scheme);

struct OrientationEvent {
  std::string src, tgt;  // space-joined phrase credited with the event
  bool with_respect_to_previous = true;
  Orientation orientation = Orientation::monotone;
};

// Segments a sentence pair into its minimal consistent blocks (unaligned
// target words attach to the following block) and emits one event per
// direction per adjacent block transition. The hierarchical scheme merges
// the neighbouring side into its maximal contiguous covered run first.
// Blocks longer than max_len on either side are skipped as credited
// phrases.
std::vector<OrientationEvent> collect_orientation_events(
    const SentencePair& pair, const AlignmentLinks& alignment,
    ReorderingScheme scheme, int max_len = 7);

struct ReorderingDistributions {
  std::vector<double> prev;  // indexed by orientation, sums to 1
  std::vector<double> next;
};

struct ReorderingModel {
  ReorderingScheme scheme = ReorderingScheme::msd_bidirectional;
  std::map<std::pair<std::string, std::string>, ReorderingDistributions> table;
  ReorderingDistributions global;  // fallback for unseen phrase pairs

  const ReorderingDistributions& lookup(const std::string& src,
                                        const std::string& tgt) const;

  void save(const std::string& path) const;
  static ReorderingModel load(const std::string& path);
};

// Relative frequencies with add-sigma smoothing against the global
// orientation distribution: p(o) = (n_o + sigma*A*g_o) / (N + sigma*A).
ReorderingModel estimate_reordering(const std::vector<OrientationEvent>& events,
                                    ReorderingScheme scheme, double sigma = 0.5);

ReorderingModel train_reordering(const ParallelCorpus& corpus,
                                 const std::vector<AlignmentLinks>& alignments,
                                 ReorderingScheme scheme, double sigma = 0.5,
                                 int max_len = 7);

// --- compound splitting ---

// Best segmentation into at most max_parts in-vocabulary parts of at least
// min_part_len code points each, kept only when the geometric mean of the
// part frequencies strictly exceeds the word's own frequency (0 if unseen).
// Ties prefer fewer parts, then the longest first part.
std::vector<std::string> compound_split(const Token& word,
                                        const Vocabulary& vocab,
                                        std::size_t min_part_len = 3,
                                        std::size_t max_parts = 2);

Sentence apply_compound_split(const Sentence& sentence, const Vocabulary& vocab,
                              std::size_t min_part_len = 3,
                              std::size_t max_parts = 2);

// --- extract file I/O: src ||| tgt ||| i-j i-j ... ---

void save_extract(const std::string& path,
                  const std::vector<ExtractedPhrase>& extracted);
std::vector<ExtractedPhrase> load_extract(const std::string& path);

}  // namespace mtsmt::phrase
