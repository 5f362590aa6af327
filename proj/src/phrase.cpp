#include "mtsmt/phrase.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mtsmt/common.hpp"
#include "mtsmt/error.hpp"

namespace mtsmt::phrase {

std::vector<PhraseInstance> extract_phrases(const SentencePair& pair,
                                            const AlignmentLinks& alignment,
                                            int max_len) {
  const int m = static_cast<int>(pair.source.size());
  const int n = static_cast<int>(pair.target.size());
  if (alignment.source_len != m || alignment.target_len != n)
    throw Error("extract_phrases: alignment dimensions do not match the pair");
  std::vector<char> tgt_aligned(static_cast<std::size_t>(n), 0);
  for (const Link& l : alignment.links)
    tgt_aligned[static_cast<std::size_t>(l.tgt)] = 1;

  std::vector<PhraseInstance> out;
  for (int s1 = 0; s1 < m; ++s1) {
    for (int s2 = s1 + 1; s2 <= std::min(m, s1 + max_len); ++s2) {
      // Target projection of the source span.
      int tmin = n, tmax = -1;
      for (const Link& l : alignment.links)
        if (l.src >= s1 && l.src < s2) {
          tmin = std::min(tmin, l.tgt);
          tmax = std::max(tmax, l.tgt);
        }
      if (tmax < 0) continue;  // no link inside
      // Consistency: links in the projected target range must stay inside.
      bool consistent = true;
      for (const Link& l : alignment.links)
        if (l.tgt >= tmin && l.tgt <= tmax && (l.src < s1 || l.src >= s2)) {
          consistent = false;
          break;
        }
      if (!consistent) continue;
      // Extend over unaligned target boundary words.
      for (int t1 = tmin; t1 >= 0 && (t1 == tmin || !tgt_aligned[static_cast<std::size_t>(t1)]); --t1) {
        for (int t2 = tmax;
             t2 < n && (t2 == tmax || !tgt_aligned[static_cast<std::size_t>(t2)]);
             ++t2) {
          if (t2 - t1 + 1 > max_len) break;
          PhraseInstance inst;
          inst.span = {s1, s2, t1, t2 + 1};
          for (const Link& l : alignment.links)
            if (l.src >= s1 && l.src < s2 && l.tgt >= t1 && l.tgt <= t2)
              inst.links.push_back({l.src - s1, l.tgt - t1});
          std::sort(inst.links.begin(), inst.links.end());
          out.push_back(std::move(inst));
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PhraseInstance& a, const PhraseInstance& b) {
              return a.span < b.span;
            });
  return out;
}

namespace {

template <typename BlockRunner>
std::vector<ExtractedPhrase> extract_corpus_impl(
    const ParallelCorpus& corpus, const std::vector<AlignmentLinks>& alignments,
    int max_len, BlockRunner&& run) {
  if (corpus.pairs.size() != alignments.size())
    throw Error("extract_corpus: alignment count differs from corpus size");
  std::vector<std::vector<ExtractedPhrase>> per_pair(corpus.pairs.size());
  run(corpus.pairs.size(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto& pair = corpus.pairs[p];
      for (const PhraseInstance& inst :
           extract_phrases(pair, alignments[p], max_len)) {
        ExtractedPhrase e;
        e.src.assign(pair.source.begin() + inst.span.src_begin,
                     pair.source.begin() + inst.span.src_end);
        e.tgt.assign(pair.target.begin() + inst.span.tgt_begin,
                     pair.target.begin() + inst.span.tgt_end);
        e.links = inst.links;
        per_pair[p].push_back(std::move(e));
      }
    }
  });
  std::vector<ExtractedPhrase> out;
  for (auto& v : per_pair)
    for (auto& e : v) out.push_back(std::move(e));
  return out;
}

}  // namespace

std::vector<ExtractedPhrase> extract_corpus(
    const ParallelCorpus& corpus, const std::vector<AlignmentLinks>& alignments,
    int max_len) {
  return extract_corpus_impl(corpus, alignments, max_len,
                             [](std::size_t n, std::size_t bs, auto fn) {
                               parallel_blocks(n, bs, fn);
                             });
}

std::vector<ExtractedPhrase> extract_corpus_serial(
    const ParallelCorpus& corpus, const std::vector<AlignmentLinks>& alignments,
    int max_len) {
  return extract_corpus_impl(corpus, alignments, max_len,
                             [](std::size_t n, std::size_t bs, auto fn) {
                               serial_blocks(n, bs, fn);
                             });
}

void PhraseTable::add(const Sentence& src, const Sentence& tgt,
                      PhraseFeatures f) {
  auto& options = entries_[join(src)];
  options.push_back({tgt, f});
  std::sort(options.begin(), options.end(),
            [](const TargetOption& a, const TargetOption& b) {
              return a.tgt < b.tgt;
            });
  max_source_len_ = std::max(max_source_len_, static_cast<int>(src.size()));
}

const std::vector<TargetOption>* PhraseTable::lookup(const Sentence& src) const {
  auto it = entries_.find(join(src));
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t PhraseTable::size() const {
  std::size_t n = 0;
  for (const auto& [src, options] : entries_) n += options.size();
  return n;
}

void PhraseTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write phrase table: " + path);
  char buf[128];
  for (const auto& [src, options] : entries_)
    for (const auto& opt : options) {
      std::snprintf(buf, sizeof(buf), "%.10g %.10g %.10g %.10g",
                    opt.features.phi_fe, opt.features.lex_fe,
                    opt.features.phi_ef, opt.features.lex_ef);
      out << src << " ||| " << join(opt.tgt) << " ||| " << buf << '\n';
    }
}

namespace {

std::vector<std::string> split_on_delim(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(" ||| ", pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 5;
  }
  return fields;
}

}  // namespace

PhraseTable PhraseTable::load(const std::string& path) {
  PhraseTable table;
  std::size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_on_delim(line);
    if (fields.size() != 3)
      throw FormatError("phrase table " + path + " line " +
                        std::to_string(lineno) + ": expected 3 fields");
    const auto scores = split_ws(fields[2]);
    if (scores.size() != 4)
      throw FormatError("phrase table " + path + " line " +
                        std::to_string(lineno) + ": expected 4 scores");
    PhraseFeatures f;
    f.phi_fe = std::stod(scores[0]);
    f.lex_fe = std::stod(scores[1]);
    f.phi_ef = std::stod(scores[2]);
    f.lex_ef = std::stod(scores[3]);
    table.add(split_ws(fields[0]), split_ws(fields[1]), f);
  }
  return table;
}

namespace {

double lexical_weight(const Sentence& generated, const Sentence& conditioning,
                      const std::vector<Link>& links, bool links_index_generated_first,
                      const align::LexicalTable& table, std::size_t stem_k) {
  // Product over generated-side words of the average t(word | linked
  // conditioners), or t(word | null) for unlinked words.
  auto key = [&](const std::string& w) { return stem_k ? stem(w, stem_k) : w; };
  double weight = 1.0;
  for (std::size_t g = 0; g < generated.size(); ++g) {
    double sum = 0.0;
    int linked = 0;
    for (const Link& l : links) {
      const int gi = links_index_generated_first ? l.src : l.tgt;
      const int ci = links_index_generated_first ? l.tgt : l.src;
      if (static_cast<std::size_t>(gi) == g) {
        sum += table.prob_surface(
            key(conditioning[static_cast<std::size_t>(ci)]), key(generated[g]));
        ++linked;
      }
    }
    if (linked == 0)
      weight *= table.prob_surface("<null>", key(generated[g]));
    else
      weight *= sum / linked;
  }
  return weight;
}

}  // namespace

PhraseTable score_phrase_table(const std::vector<ExtractedPhrase>& extracted,
                               const align::LexicalTable& lex_fwd,
                               const align::LexicalTable& lex_bwd,
                               std::size_t stem_k) {
  if (extracted.empty()) throw Error("score_phrase_table: nothing extracted");
  struct PairStats {
    std::uint64_t count = 0;
    std::map<std::vector<Link>, std::uint64_t> alignments;
  };
  std::map<std::pair<std::string, std::string>, PairStats> stats;
  std::map<std::string, std::uint64_t> src_count, tgt_count;
  std::map<std::pair<std::string, std::string>, std::pair<Sentence, Sentence>>
      tokens;
  for (const auto& e : extracted) {
    const std::string src = join(e.src), tgt = join(e.tgt);
    auto& ps = stats[{src, tgt}];
    ++ps.count;
    ++ps.alignments[e.links];
    ++src_count[src];
    ++tgt_count[tgt];
    tokens.try_emplace({src, tgt}, e.src, e.tgt);
  }
  PhraseTable table;
  for (const auto& [key, ps] : stats) {
    const auto& [src_tokens, tgt_tokens] = tokens.find(key)->second;
    // Most frequent internal alignment; map order breaks ties toward the
    // lexicographically smallest link set.
    const std::vector<Link>* best_links = nullptr;
    std::uint64_t best = 0;
    for (const auto& [links, cnt] : ps.alignments)
      if (cnt > best) {
        best = cnt;
        best_links = &links;
      }
    PhraseFeatures f;
    f.phi_ef = static_cast<double>(ps.count) /
               static_cast<double>(src_count.find(key.first)->second);
    f.phi_fe = static_cast<double>(ps.count) /
               static_cast<double>(tgt_count.find(key.second)->second);
    // lex(f|e): source words generated from target conditioners.
    f.lex_fe =
        lexical_weight(src_tokens, tgt_tokens, *best_links, true, lex_fwd, stem_k);
    // lex(e|f): target words generated from source conditioners.
    f.lex_ef =
        lexical_weight(tgt_tokens, src_tokens, *best_links, false, lex_bwd, stem_k);
    table.add(src_tokens, tgt_tokens, f);
  }
  return table;
}

// --- reordering ---

ReorderingScheme scheme_from_name(const std::string& name) {
  if (name == "msd" || name == "msd-bidirectional")
    return ReorderingScheme::msd_bidirectional;
  if (name == "hier-mslr" || name == "hier-mslr-bidirectional")
    return ReorderingScheme::hier_mslr_bidirectional;
  throw Error("unknown reordering scheme: " + name);
}

const char* scheme_name(ReorderingScheme s) {
  return s == ReorderingScheme::msd_bidirectional ? "msd-bidirectional"
                                                  : "hier-mslr-bidirectional";
}

int orientation_arity(ReorderingScheme s) {
  return s == ReorderingScheme::msd_bidirectional ? 3 : 4;
}

Orientation classify_orientation(const SpanPair& earlier, const SpanPair& later,
                                 ReorderingScheme scheme) {
  const bool overlap =
      earlier.src_begin < later.src_end && later.src_begin < earlier.src_end;
  if (overlap) throw Error("classify_orientation: overlapping source spans");
  if (earlier.src_end == later.src_begin) return Orientation::monotone;
  if (later.src_end == earlier.src_begin) return Orientation::swap;
  if (scheme == ReorderingScheme::msd_bidirectional)
    return Orientation::discontinuous;
  return later.src_begin > earlier.src_end ? Orientation::discontinuous_right
                                           : Orientation::discontinuous_left;
}

namespace {

// Minimal consistent blocks in target order via interval closure.
std::vector<SpanPair> canonical_blocks(const AlignmentLinks& alignment) {
  const int n = alignment.target_len;
  std::vector<char> consumed(static_cast<std::size_t>(n), 0);
  std::vector<char> aligned(static_cast<std::size_t>(n), 0);
  for (const Link& l : alignment.links)
    aligned[static_cast<std::size_t>(l.tgt)] = 1;
  std::vector<SpanPair> blocks;
  for (int j = 0; j < n; ++j) {
    if (consumed[static_cast<std::size_t>(j)] || !aligned[static_cast<std::size_t>(j)])
      continue;
    int tb = j, te = j + 1, sb = 0, se = 0;
    while (true) {
      int smin = alignment.source_len, smax = -1;
      for (const Link& l : alignment.links)
        if (l.tgt >= tb && l.tgt < te) {
          smin = std::min(smin, l.src);
          smax = std::max(smax, l.src);
        }
      sb = smin;
      se = smax + 1;
      int tmin = tb, tmax = te - 1;
      for (const Link& l : alignment.links)
        if (l.src >= sb && l.src < se) {
          tmin = std::min(tmin, l.tgt);
          tmax = std::max(tmax, l.tgt);
        }
      if (tmin == tb && tmax == te - 1) break;
      tb = tmin;
      te = tmax + 1;
    }
    for (int t = tb; t < te; ++t) consumed[static_cast<std::size_t>(t)] = 1;
    blocks.push_back({sb, se, tb, te});
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const SpanPair& a, const SpanPair& b) {
              return a.tgt_begin < b.tgt_begin;
            });
  // Attach unaligned target words to the following block; trailing ones to
  // the last block.
  if (!blocks.empty()) {
    blocks.front().tgt_begin = 0;
    for (std::size_t b = 1; b < blocks.size(); ++b)
      blocks[b].tgt_begin = blocks[b - 1].tgt_end;
    blocks.back().tgt_end = n;
  }
  return blocks;
}

// Maximal contiguous run of covered source positions containing [b, e).
SpanPair covered_run(const std::vector<char>& covered, int b, int e) {
  int lo = b, hi = e;
  while (lo > 0 && covered[static_cast<std::size_t>(lo - 1)]) --lo;
  while (hi < static_cast<int>(covered.size()) &&
         covered[static_cast<std::size_t>(hi)])
    ++hi;
  return {lo, hi, 0, 0};
}

}  // namespace

std::vector<OrientationEvent> collect_orientation_events(
    const SentencePair& pair, const AlignmentLinks& alignment,
    ReorderingScheme scheme, int max_len) {
  const std::vector<SpanPair> blocks = canonical_blocks(alignment);
  std::vector<OrientationEvent> events;
  if (blocks.size() < 2) return events;
  const bool hier = scheme == ReorderingScheme::hier_mslr_bidirectional;
  const std::size_t m = pair.source.size();

  auto phrase_of = [&](const SpanPair& b) {
    return std::pair<std::string, std::string>(
        join(Sentence(pair.source.begin() + b.src_begin,
                      pair.source.begin() + b.src_end)),
        join(Sentence(pair.target.begin() + b.tgt_begin,
                      pair.target.begin() + b.tgt_end)));
  };
  auto fits = [&](const SpanPair& b) {
    return b.src_end - b.src_begin <= max_len && b.tgt_end - b.tgt_begin <= max_len;
  };

  // Previous-direction: coverage grows along the derivation.
  std::vector<char> covered(m, 0);
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    if (p > 0 && fits(blocks[p])) {
      const SpanPair anchor =
          hier ? covered_run(covered, blocks[p - 1].src_begin,
                             blocks[p - 1].src_end)
               : blocks[p - 1];
      auto [src, tgt] = phrase_of(blocks[p]);
      events.push_back(
          {src, tgt, true, classify_orientation(anchor, blocks[p], scheme)});
    }
    for (int s = blocks[p].src_begin; s < blocks[p].src_end; ++s)
      covered[static_cast<std::size_t>(s)] = 1;
  }
  // Next-direction: mirror with suffix coverage.
  std::fill(covered.begin(), covered.end(), 0);
  for (std::size_t q = blocks.size(); q-- > 0;) {
    if (q + 1 < blocks.size() && fits(blocks[q])) {
      const SpanPair anchor =
          hier ? covered_run(covered, blocks[q + 1].src_begin,
                             blocks[q + 1].src_end)
               : blocks[q + 1];
      auto [src, tgt] = phrase_of(blocks[q]);
      events.push_back(
          {src, tgt, false, classify_orientation(blocks[q], anchor, scheme)});
    }
    for (int s = blocks[q].src_begin; s < blocks[q].src_end; ++s)
      covered[static_cast<std::size_t>(s)] = 1;
  }
  return events;
}

const ReorderingDistributions& ReorderingModel::lookup(
    const std::string& src, const std::string& tgt) const {
  auto it = table.find({src, tgt});
  return it == table.end() ? global : it->second;
}

ReorderingModel estimate_reordering(const std::vector<OrientationEvent>& events,
                                    ReorderingScheme scheme, double sigma) {
  const int arity = orientation_arity(scheme);
  ReorderingModel model;
  model.scheme = scheme;

  std::vector<double> global_prev(static_cast<std::size_t>(arity), 0.0);
  std::vector<double> global_next(static_cast<std::size_t>(arity), 0.0);
  struct Counts {
    std::vector<double> prev, next;
  };
  std::map<std::pair<std::string, std::string>, Counts> counts;
  for (const auto& ev : events) {
    auto& c = counts[{ev.src, ev.tgt}];
    if (c.prev.empty()) {
      c.prev.assign(static_cast<std::size_t>(arity), 0.0);
      c.next.assign(static_cast<std::size_t>(arity), 0.0);
    }
    const auto o = static_cast<std::size_t>(ev.orientation);
    if (ev.with_respect_to_previous) {
      c.prev[o] += 1;
      global_prev[o] += 1;
    } else {
      c.next[o] += 1;
      global_next[o] += 1;
    }
  }
  // Add-sigma smoothing toward the uniform distribution: p(o) =
  // (n_o + sigma) / (N + sigma*A). Unseen orientations keep positive
  // probability even when globally unseen, and a phrase pair seen 10 times
  // all-monotone gets p(M) = 10.5/11.5 at sigma = 0.5.
  auto smooth = [&](const std::vector<double>& n) {
    double total = 0;
    for (double x : n) total += x;
    std::vector<double> p(static_cast<std::size_t>(arity));
    for (int o = 0; o < arity; ++o)
      p[static_cast<std::size_t>(o)] =
          (n[static_cast<std::size_t>(o)] + sigma) / (total + sigma * arity);
    return p;
  };
  // The global distribution (same smoothing) backs unseen phrase pairs.
  model.global.prev = smooth(global_prev);
  model.global.next = smooth(global_next);
  for (const auto& [key, c] : counts) {
    ReorderingDistributions d;
    d.prev = smooth(c.prev);
    d.next = smooth(c.next);
    model.table[key] = std::move(d);
  }
  return model;
}

ReorderingModel train_reordering(const ParallelCorpus& corpus,
                                 const std::vector<AlignmentLinks>& alignments,
                                 ReorderingScheme scheme, double sigma,
                                 int max_len) {
  if (corpus.pairs.size() != alignments.size())
    throw Error("train_reordering: alignment count differs from corpus size");
  std::vector<std::vector<OrientationEvent>> per_pair(corpus.pairs.size());
  parallel_blocks(corpus.pairs.size(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p)
      per_pair[p] = collect_orientation_events(corpus.pairs[p], alignments[p],
                                               scheme, max_len);
  });
  std::vector<OrientationEvent> events;
  for (auto& v : per_pair)
    for (auto& e : v) events.push_back(std::move(e));
  return estimate_reordering(events, scheme, sigma);
}

void ReorderingModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write reordering table: " + path);
  const int arity = orientation_arity(scheme);
  out << "# mtsmt-reordering scheme=" << scheme_name(scheme)
      << " orientations=" << arity << '\n';
  char buf[32];
  auto dump = [&](const std::vector<double>& v) {
    std::string s;
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), " %.10g", x);
      s += buf;
    }
    return s;
  };
  out << "# global |||" << dump(global.prev) << dump(global.next) << '\n';
  for (const auto& [key, d] : table)
    out << key.first << " ||| " << key.second << " |||" << dump(d.prev)
        << dump(d.next) << '\n';
}

ReorderingModel ReorderingModel::load(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0].rfind("# mtsmt-reordering scheme=", 0) != 0)
    throw FormatError("not a reordering table: " + path);
  ReorderingModel model;
  {
    std::string rest = lines[0].substr(std::string("# mtsmt-reordering scheme=").size());
    const auto space = rest.find(' ');
    model.scheme = scheme_from_name(rest.substr(0, space));
  }
  const int arity = orientation_arity(model.scheme);
  auto parse_dists = [&](const std::string& field) {
    const auto nums = split_ws(field);
    if (nums.size() != static_cast<std::size_t>(2 * arity))
      throw FormatError("reordering table: expected " +
                        std::to_string(2 * arity) + " probabilities");
    ReorderingDistributions d;
    for (int o = 0; o < arity; ++o)
      d.prev.push_back(std::stod(nums[static_cast<std::size_t>(o)]));
    for (int o = 0; o < arity; ++o)
      d.next.push_back(std::stod(nums[static_cast<std::size_t>(arity + o)]));
    return d;
  };
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (lines[i].rfind("# global |||", 0) == 0) {
      model.global = parse_dists(lines[i].substr(12));
      continue;
    }
    const auto fields = split_on_delim(lines[i]);
    if (fields.size() != 3)
      throw FormatError("reordering table line " + std::to_string(i + 1) +
                        ": expected 3 fields");
    model.table[{fields[0], fields[1]}] = parse_dists(fields[2]);
  }
  return model;
}

// --- compound splitting ---

namespace {

struct SplitCandidate {
  std::vector<std::string> parts;
  double log_geo_mean = 0;
};

void enumerate_splits(const std::vector<char32_t>& cps, std::size_t from,
                      std::size_t parts_left, std::size_t min_part_len,
                      const Vocabulary& vocab,
                      std::vector<std::string>& current,
                      std::vector<double>& log_freqs,
                      std::vector<SplitCandidate>& out) {
  if (from == cps.size()) {
    if (current.size() >= 2) {
      double sum = 0;
      for (double lf : log_freqs) sum += lf;
      out.push_back({current, sum / static_cast<double>(current.size())});
    }
    return;
  }
  if (parts_left == 0) return;
  for (std::size_t end = from + min_part_len; end <= cps.size(); ++end) {
    // Remaining tail must still be splittable or empty.
    if (end < cps.size() && cps.size() - end < min_part_len) continue;
    std::string part;
    for (std::size_t i = from; i < end; ++i) utf8::append(part, cps[i]);
    const std::uint64_t freq = vocab.count_of(part);
    if (freq == 0) continue;
    current.push_back(part);
    log_freqs.push_back(std::log(static_cast<double>(freq)));
    enumerate_splits(cps, end, parts_left - 1, min_part_len, vocab, current,
                     log_freqs, out);
    current.pop_back();
    log_freqs.pop_back();
  }
}

}  // namespace

std::vector<std::string> compound_split(const Token& word,
                                        const Vocabulary& vocab,
                                        std::size_t min_part_len,
                                        std::size_t max_parts) {
  const std::vector<char32_t> cps = utf8::decode(word);
  if (cps.size() < 2 * min_part_len || max_parts < 2) return {word};
  std::vector<SplitCandidate> candidates;
  std::vector<std::string> current;
  std::vector<double> log_freqs;
  enumerate_splits(cps, 0, max_parts, min_part_len, vocab, current, log_freqs,
                   candidates);
  if (candidates.empty()) return {word};

  const SplitCandidate* best = &candidates[0];
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const SplitCandidate& c = candidates[i];
    const double diff = c.log_geo_mean - best->log_geo_mean;
    if (diff > 1e-12) {
      best = &c;
    } else if (diff > -1e-12) {
      // Tie: fewer parts, then longer first part (then second, ...).
      if (c.parts.size() < best->parts.size()) {
        best = &c;
      } else if (c.parts.size() == best->parts.size()) {
        for (std::size_t k = 0; k < c.parts.size(); ++k) {
          const std::size_t cl = utf8::length(c.parts[k]);
          const std::size_t bl = utf8::length(best->parts[k]);
          if (cl != bl) {
            if (cl > bl) best = &c;
            break;
          }
        }
      }
    }
  }
  const double word_freq = static_cast<double>(vocab.count_of(word));
  const double geo_mean = std::exp(best->log_geo_mean);
  if (geo_mean > word_freq) return best->parts;
  return {word};
}

Sentence apply_compound_split(const Sentence& sentence, const Vocabulary& vocab,
                              std::size_t min_part_len, std::size_t max_parts) {
  Sentence out;
  for (const Token& tok : sentence)
    for (std::string& part : compound_split(tok, vocab, min_part_len, max_parts))
      out.push_back(std::move(part));
  return out;
}

// --- extract file ---

void save_extract(const std::string& path,
                  const std::vector<ExtractedPhrase>& extracted) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write extract file: " + path);
  for (const auto& e : extracted) {
    out << join(e.src) << " ||| " << join(e.tgt) << " |||";
    for (const Link& l : e.links) out << ' ' << l.src << '-' << l.tgt;
    out << '\n';
  }
}

std::vector<ExtractedPhrase> load_extract(const std::string& path) {
  std::vector<ExtractedPhrase> out;
  std::size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_on_delim(line);
    if (fields.size() != 3)
      throw FormatError("extract file " + path + " line " +
                        std::to_string(lineno) + ": expected 3 fields");
    ExtractedPhrase e;
    e.src = split_ws(fields[0]);
    e.tgt = split_ws(fields[1]);
    for (const std::string& tok : split_ws(fields[2])) {
      const auto dash = tok.find('-');
      if (dash == std::string::npos)
        throw FormatError("extract file: bad link " + tok);
      e.links.push_back(
          {std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1))});
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace mtsmt::phrase
