#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "mtsmt/common.hpp"
#include "mtsmt/corpus.hpp"
#include "mtsmt/error.hpp"

using namespace mtsmt;

TEST_CASE("tokenize splits punctuation into single tokens") {
  CHECK(tokenize("Hello, world.") == Sentence{"Hello", ",", "world", "."});
  CHECK(tokenize("co-operate") == Sentence{"co-operate"});
  CHECK(tokenize("a  b") == Sentence{"a", "b"});
  CHECK(tokenize("don't") == Sentence{"don't"});
  CHECK(tokenize("- leading") == Sentence{"-", "leading"});
  CHECK(tokenize("trailing-") == Sentence{"trailing", "-"});
  CHECK(tokenize("") == Sentence{});
  CHECK(tokenize("   ") == Sentence{});
  CHECK(tokenize("10.5%") == Sentence{"10", ".", "5", "%"});
}

TEST_CASE("tokenize handles UTF-8 and rejects invalid bytes") {
  CHECK(tokenize("zażółć") ==
        Sentence{"zażółć"});
  CHECK(tokenize("„quote”") == Sentence{"„", "quote", "”"});
  CHECK_THROWS_AS(tokenize("bad\xFF" "byte"), EncodingError);
  CHECK_THROWS_AS(tokenize("trunc" "\xC3"), EncodingError);
}

TEST_CASE("tokenize fixpoint: joining and re-tokenizing is stable") {
  std::mt19937_64 rng(11);
  const std::string alphabet = "abc-.', ";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const std::size_t len = rng() % 30;
    for (std::size_t i = 0; i < len; ++i)
      text += alphabet[rng() % alphabet.size()];
    Sentence once;
    try {
      once = tokenize(text);
    } catch (const EncodingError&) {
      continue;
    }
    const Sentence twice = tokenize(join(once));
    CHECK(once == twice);
    for (const auto& tok : once) {
      CHECK(!tok.empty());
      CHECK(tok.find(' ') == std::string::npos);
      CHECK(tok.find('\t') == std::string::npos);
    }
  }
}

TEST_CASE("normalize_punctuation maps typography and is idempotent") {
  CHECK(normalize_punctuation("“ok”") == "\"ok\"");
  CHECK(normalize_punctuation("a—b") == "a-b");
  CHECK(normalize_punctuation("plain text") == "plain text");
  CHECK(normalize_punctuation("x…") == "x...");
  CHECK(normalize_punctuation("a b") == "a b");
  const std::string samples[] = {"“a” ‘b’ – …",
                                 "mixed «guillemets» and space",
                                 "ascii only"};
  for (const auto& s : samples) {
    const std::string one = normalize_punctuation(s);
    CHECK(normalize_punctuation(one) == one);
  }
}

namespace {

SentencePair make_pair(std::size_t src_len, std::size_t tgt_len) {
  SentencePair p;
  for (std::size_t i = 0; i < src_len; ++i) p.source.push_back("s");
  for (std::size_t i = 0; i < tgt_len; ++i) p.target.push_back("t");
  p.line_number = 1;
  return p;
}

}  // namespace

TEST_CASE("clean_pair length and ratio rules") {
  CHECK_FALSE(clean_pair(make_pair(81, 10)).keep);
  CHECK(clean_pair(make_pair(81, 10)).reason == DropReason::too_long);
  CHECK(clean_pair(make_pair(80, 80)).keep);
  CHECK(clean_pair(make_pair(1, 10)).reason == DropReason::ratio);
  CHECK(clean_pair(make_pair(1, 9)).keep);  // ratio exactly 9 stays
  CHECK(clean_pair(make_pair(0, 4)).reason == DropReason::empty);
  CHECK(clean_pair(make_pair(1, 10), 80, 0).keep);  // ratio filter disabled
  // The kept set never contains an over-long side.
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto p = make_pair(1 + rng() % 120, 1 + rng() % 120);
    if (clean_pair(p, 80, 0).keep) {
      CHECK(p.source.size() <= 80);
      CHECK(p.target.size() <= 80);
    }
  }
}

TEST_CASE("filter_noise script ratio") {
  const std::vector<utf8::Script> latin{utf8::Script::Latin};
  CHECK(filter_noise({"all", "latin", "words"}, latin).keep);
  CHECK_FALSE(filter_noise({"все", "слова"}, latin).keep);
  // One Greek character among twenty: ratio 0.05, kept.
  CHECK(filter_noise({"abcdefghij", "abcdefghiα"}, latin).keep);
  // Punctuation and digits count as common, not foreign.
  CHECK(filter_noise({"123", ",", ".", "ok"}, latin).keep);
}

TEST_CASE("train_truecaser counts non-initial and lowercase-initial tokens") {
  // Both "the" occurrences are sentence-initial: the lowercase one counts,
  // the capitalized one does not.
  const std::vector<Sentence> corpus{{"the", "cat"}, {"The", "cat"}};
  const TruecaseModel model = train_truecaser(corpus);
  REQUIRE(model.best_form.count("the"));
  CHECK(model.best_form.at("the") == "the");

  const std::vector<Sentence> nato{{"we", "saw", "NATO"},
                                   {"they", "saw", "NATO"},
                                   {"all", "praised", "NATO"}};
  CHECK(train_truecaser(nato).best_form.at("nato") == "NATO");

  CHECK(train_truecaser({}).best_form.empty());

  // Ties break toward the lexicographically smaller cased form.
  const std::vector<Sentence> tie{{"x", "Abc"}, {"x", "aBC"}};
  CHECK(train_truecaser(tie).best_form.at("abc") == "Abc");
}

TEST_CASE("truecase changes at most the first token") {
  TruecaseModel model;
  model.best_form["the"] = "the";
  model.best_form["nato"] = "NATO";
  CHECK(truecase({"The", "cat"}, model) == Sentence{"the", "cat"});
  CHECK(truecase({"Nato", "acted"}, model) == Sentence{"NATO", "acted"});
  CHECK(truecase({"Xyzzy", "!"}, model) == Sentence{"xyzzy", "!"});
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    Sentence s;
    for (std::size_t i = 0; i < 1 + rng() % 6; ++i)
      s.push_back(rng() % 2 ? "The" : "word");
    const Sentence out = truecase(s, model);
    REQUIRE(out.size() == s.size());
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(out[i] == s[i]);
  }
}

TEST_CASE("truecase model round-trips through its file format") {
  const std::vector<Sentence> corpus{{"we", "saw", "NATO", "openly"},
                                     {"it", "is", "nato-like"}};
  const TruecaseModel model = train_truecaser(corpus);
  const std::string path = "truecase_roundtrip.model";
  model.save(path);
  const TruecaseModel loaded = TruecaseModel::load(path);
  CHECK(loaded.best_form == model.best_form);
  CHECK(loaded.counts == model.counts);
  std::filesystem::remove(path);
}

namespace {

ParallelCorpus numbered_corpus(std::size_t n) {
  ParallelCorpus c;
  for (std::size_t i = 0; i < n; ++i) {
    SentencePair p;
    p.source = {"s" + std::to_string(i)};
    p.target = {"t" + std::to_string(i)};
    p.line_number = i + 1;
    c.pairs.push_back(p);
  }
  return c;
}

}  // namespace

TEST_CASE("split_corpus partitions deterministically") {
  const ParallelCorpus corpus = numbered_corpus(10000);
  const SplitResult a = split_corpus(corpus, 1000, 1000, 42);
  CHECK(a.train.pairs.size() == 8000);
  CHECK(a.dev.pairs.size() == 1000);
  CHECK(a.test.pairs.size() == 1000);

  std::set<std::size_t> seen;
  for (const auto* part : {&a.train, &a.dev, &a.test})
    for (const auto& p : part->pairs) CHECK(seen.insert(p.line_number).second);
  CHECK(seen.size() == 10000);

  const SplitResult b = split_corpus(corpus, 1000, 1000, 42);
  auto lines = [](const ParallelCorpus& c) {
    std::vector<std::size_t> out;
    for (const auto& p : c.pairs) out.push_back(p.line_number);
    return out;
  };
  CHECK(lines(a.dev) == lines(b.dev));
  CHECK(lines(a.test) == lines(b.test));
  CHECK(lines(a.train) == lines(b.train));

  const SplitResult c = split_corpus(corpus, 1000, 1000, 43);
  CHECK(lines(a.dev) != lines(c.dev));

  CHECK_THROWS_AS(split_corpus(numbered_corpus(1500), 1000, 1000, 1), Error);
}

TEST_CASE("corpus_stats counts tokens and vocabulary") {
  ParallelCorpus c;
  c.pairs.push_back({{"a", "b"}, {"c"}, 1});
  const CorpusStats st = corpus_stats(c);
  CHECK(st.sentences == 1);
  CHECK(st.source_tokens == 2);
  CHECK(st.target_tokens == 1);
  CHECK(st.source_vocab == 2);
  CHECK(st.target_vocab == 1);

  // Vocabulary size equals the cardinality of the surface-form set.
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    ParallelCorpus r;
    std::set<std::string> src_forms, tgt_forms;
    const std::size_t n = 1 + rng() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      SentencePair p;
      p.line_number = i + 1;
      for (std::size_t k = 0; k < 1 + rng() % 5; ++k) {
        p.source.push_back("w" + std::to_string(rng() % 9));
        p.target.push_back("v" + std::to_string(rng() % 7));
        src_forms.insert(p.source.back());
        tgt_forms.insert(p.target.back());
      }
      r.pairs.push_back(p);
    }
    const CorpusStats rs = corpus_stats(r);
    CHECK(rs.source_vocab == src_forms.size());
    CHECK(rs.target_vocab == tgt_forms.size());
  }
}

TEST_CASE("vocabulary ids are dense and counts sum to the token total") {
  Vocabulary v;
  CHECK(v.add("a") == 0);
  CHECK(v.add("b") == 1);
  CHECK(v.add("a") == 0);
  CHECK(v.count_of("a") == 2);
  CHECK(v.count_of("b") == 1);
  CHECK(v.total_count() == 3);
  CHECK(v.size() == 2);
  CHECK_FALSE(v.id_of("missing").has_value());
}

TEST_CASE("stem truncates code points and lowercases") {
  CHECK(stem("samochodami", 6) == "samoch");
  CHECK(stem("cat", 6) == "cat");
  CHECK(stem("Dom", 6) == "dom");
  // Truncation counts characters, not bytes.
  CHECK(stem("żółćowy", 4) == "żółć");
  CHECK(stem("ŻÓŁ", 6) == "żół");
}

TEST_CASE("load_parallel enforces equal line counts and logs empties") {
  const std::string src = "load_par.src", tgt = "load_par.tgt";
  {
    std::ofstream s(src), t(tgt);
    s << "a b\n\nc\n";
    t << "x\ny\nz\n";
  }
  std::vector<std::string> log;
  const ParallelCorpus c = load_parallel(src, tgt, &log);
  CHECK(c.pairs.size() == 2);
  REQUIRE(log.size() == 1);
  CHECK(log[0] == "2\tempty");
  {
    std::ofstream t(tgt);
    t << "only one line\n";
  }
  CHECK_THROWS_AS(load_parallel(src, tgt), Error);
  std::filesystem::remove(src);
  std::filesystem::remove(tgt);
}
