#include "mtsmt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mtsmt/common.hpp"
#include "mtsmt/error.hpp"

namespace mtsmt {

std::uint32_t Vocabulary::add(const Token& t) {
  auto [it, inserted] = ids_.emplace(t, static_cast<std::uint32_t>(surfaces_.size()));
  if (inserted) {
    surfaces_.push_back(t);
    counts_.push_back(0);
  }
  ++counts_[it->second];
  ++total_;
  return it->second;
}

std::optional<std::uint32_t> Vocabulary::id_of(const Token& t) const {
  auto it = ids_.find(t);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::count_of(const Token& t) const {
  auto it = ids_.find(t);
  return it == ids_.end() ? 0 : counts_[it->second];
}

Vocabulary build_vocabulary(const std::vector<Sentence>& side) {
  Vocabulary v;
  for (const auto& s : side)
    for (const auto& t : s) v.add(t);
  return v;
}

Sentence tokenize(std::string_view text, const std::string&) {
  const std::vector<char32_t> cps = utf8::decode(text);
  Sentence out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (utf8::is_space(cp)) {
      flush();
      continue;
    }
    if (utf8::is_word_char(cp)) {
      utf8::append(current, cp);
      continue;
    }
    // Hyphen/apostrophe stay attached between word characters.
    if ((cp == U'-' || cp == U'\'') && i > 0 && i + 1 < cps.size() &&
        utf8::is_word_char(cps[i - 1]) && utf8::is_word_char(cps[i + 1])) {
      utf8::append(current, cp);
      continue;
    }
    flush();
    std::string one;
    utf8::append(one, cp);
    out.push_back(std::move(one));
  }
  flush();
  return out;
}

std::string normalize_punctuation(std::string_view text) {
  const std::vector<char32_t> cps = utf8::decode(text);
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : cps) {
    switch (cp) {
      case 0x201C:
      case 0x201D:
      case 0x201E:
      case 0x201F:
      case 0x00AB:
      case 0x00BB:
        out.push_back('"');
        break;
      case 0x2018:
      case 0x2019:
      case 0x201A:
      case 0x201B:
        out.push_back('\'');
        break;
      case 0x2012:
      case 0x2013:
      case 0x2014:
      case 0x2015:
        out.push_back('-');
        break;
      case 0x2026:
        out += "...";
        break;
      case 0x00A0:
      case 0x202F:
        out.push_back(' ');
        break;
      default:
        utf8::append(out, cp);
    }
  }
  return out;
}

const char* drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::kept: return "kept";
    case DropReason::too_long: return "too_long";
    case DropReason::empty: return "empty";
    case DropReason::ratio: return "ratio";
    case DropReason::noise: return "noise";
  }
  return "?";
}

CleanDecision clean_pair(const SentencePair& pair, std::size_t max_len,
                         double max_ratio) {
  const std::size_t s = pair.source.size(), t = pair.target.size();
  if (s == 0 || t == 0) return {false, DropReason::empty};
  if (s > max_len || t > max_len) return {false, DropReason::too_long};
  if (max_ratio > 0) {
    const double longer = static_cast<double>(std::max(s, t));
    const double shorter = static_cast<double>(std::min(s, t));
    if (longer / shorter > max_ratio) return {false, DropReason::ratio};
  }
  return {true, DropReason::kept};
}

CleanDecision filter_noise(const Sentence& sentence,
                           const std::vector<utf8::Script>& allowed_scripts,
                           double threshold) {
  std::size_t total = 0, foreign = 0;
  for (const Token& tok : sentence) {
    for (char32_t cp : utf8::decode(tok)) {
      ++total;
      const utf8::Script sc = utf8::script_of(cp);
      if (sc == utf8::Script::Common) continue;
      if (std::find(allowed_scripts.begin(), allowed_scripts.end(), sc) ==
          allowed_scripts.end())
        ++foreign;
    }
  }
  if (total == 0) return {false, DropReason::empty};
  const double ratio = static_cast<double>(foreign) / static_cast<double>(total);
  if (ratio > threshold) return {false, DropReason::noise};
  return {true, DropReason::kept};
}

TruecaseModel train_truecaser(const std::vector<Sentence>& side) {
  TruecaseModel model;
  for (const auto& sentence : side) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      const Token& tok = sentence[i];
      if (i == 0 && utf8::lower_copy(tok) != tok) continue;
      ++model.counts[tok];
    }
  }
  // Per lowercased key: highest count, ties to the lexicographically
  // smallest cased form (std::map iteration order makes that the first win).
  std::map<std::string, std::uint64_t> best_count;
  for (const auto& [cased, count] : model.counts) {
    const std::string key = utf8::lower_copy(cased);
    auto it = best_count.find(key);
    if (it == best_count.end() || count > it->second) {
      best_count[key] = count;
      model.best_form[key] = cased;
    }
  }
  return model;
}

Sentence truecase(const Sentence& sentence, const TruecaseModel& model) {
  if (sentence.empty()) return sentence;
  Sentence out = sentence;
  const std::string key = utf8::lower_copy(out[0]);
  auto it = model.best_form.find(key);
  out[0] = it != model.best_form.end() ? it->second : key;
  return out;
}

void TruecaseModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write truecase model: " + path);
  for (const auto& [cased, count] : counts) out << cased << '\t' << count << '\n';
}

TruecaseModel TruecaseModel::load(const std::string& path) {
  TruecaseModel raw;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("bad truecase model line: " + line);
    raw.counts[line.substr(0, tab)] =
        std::stoull(line.substr(tab + 1));
  }
  TruecaseModel model;
  model.counts = raw.counts;
  std::map<std::string, std::uint64_t> best_count;
  for (const auto& [cased, count] : model.counts) {
    const std::string key = utf8::lower_copy(cased);
    auto it = best_count.find(key);
    if (it == best_count.end() || count > it->second) {
      best_count[key] = count;
      model.best_form[key] = cased;
    }
  }
  return model;
}

SplitResult split_corpus(const ParallelCorpus& corpus, std::size_t n_dev,
                         std::size_t n_test, std::uint64_t seed) {
  const std::size_t n = corpus.pairs.size();
  if (n <= n_dev + n_test)
    throw Error("corpus too small to split: " + std::to_string(n) +
                " pairs, need more than " + std::to_string(n_dev + n_test));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates with a plain modulo draw: fully specified by the
  // standard, so splits reproduce across implementations.
  for (std::size_t i = 0; i < n_dev + n_test; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  std::set<std::size_t> dev_idx(idx.begin(), idx.begin() + static_cast<long>(n_dev));
  std::set<std::size_t> test_idx(idx.begin() + static_cast<long>(n_dev),
                                 idx.begin() + static_cast<long>(n_dev + n_test));
  SplitResult r;
  r.train.source_lang = r.dev.source_lang = r.test.source_lang = corpus.source_lang;
  r.train.target_lang = r.dev.target_lang = r.test.target_lang = corpus.target_lang;
  for (std::size_t i = 0; i < n; ++i) {
    if (dev_idx.count(i))
      r.dev.pairs.push_back(corpus.pairs[i]);
    else if (test_idx.count(i))
      r.test.pairs.push_back(corpus.pairs[i]);
    else
      r.train.pairs.push_back(corpus.pairs[i]);
  }
  return r;
}

CorpusStats corpus_stats(const ParallelCorpus& corpus) {
  CorpusStats st;
  st.sentences = corpus.pairs.size();
  Vocabulary src, tgt;
  for (const auto& p : corpus.pairs) {
    st.source_tokens += p.source.size();
    st.target_tokens += p.target.size();
    for (const auto& t : p.source) src.add(t);
    for (const auto& t : p.target) tgt.add(t);
  }
  st.source_vocab = src.size();
  st.target_vocab = tgt.size();
  return st;
}

std::string stem(const Token& token, std::size_t k) {
  std::vector<char32_t> cps = utf8::decode(token);
  if (cps.size() > k) cps.resize(k);
  for (char32_t& cp : cps) cp = utf8::to_lower(cp);
  return utf8::encode(cps);
}

ParallelCorpus load_parallel(const std::string& src_path,
                             const std::string& tgt_path,
                             std::vector<std::string>* drop_log) {
  const auto src_lines = read_lines(src_path);
  const auto tgt_lines = read_lines(tgt_path);
  if (src_lines.size() != tgt_lines.size())
    throw Error("parallel files differ in line count: " + src_path + " has " +
                std::to_string(src_lines.size()) + ", " + tgt_path + " has " +
                std::to_string(tgt_lines.size()));
  ParallelCorpus corpus;
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    SentencePair p;
    p.source = split_ws(src_lines[i]);
    p.target = split_ws(tgt_lines[i]);
    p.line_number = i + 1;
    if (p.source.empty() || p.target.empty()) {
      if (drop_log)
        drop_log->push_back(std::to_string(i + 1) + "\t" +
                            drop_reason_name(DropReason::empty));
      continue;
    }
    corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

std::vector<Sentence> load_side(const std::string& path) {
  std::vector<Sentence> side;
  for (const auto& line : read_lines(path)) {
    Sentence s = split_ws(line);
    if (!s.empty()) side.push_back(std::move(s));
  }
  return side;
}

void write_side(const std::string& path, const std::vector<Sentence>& side) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  for (const auto& s : side) out << join(s) << '\n';
}

void write_corpus(const std::string& src_path, const std::string& tgt_path,
                  const ParallelCorpus& corpus) {
  std::ofstream src(src_path, std::ios::binary), tgt(tgt_path, std::ios::binary);
  if (!src || !tgt)
    throw Error("cannot write corpus files: " + src_path + ", " + tgt_path);
  for (const auto& p : corpus.pairs) {
    src << join(p.source) << '\n';
    tgt << join(p.target) << '\n';
  }
}

}  // namespace mtsmt
