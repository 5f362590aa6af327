#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "mtsmt/common.hpp"
#include "mtsmt/error.hpp"
#include "mtsmt/harness.hpp"
#include "mtsmt/metrics.hpp"
#include "support/synthetic.hpp"

using namespace mtsmt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path.string() : (path / child).string();
  }
};

harness::ExperimentConfig small_config(const TempDir& dir) {
  synthetic::Options opt;
  opt.pairs = 260;
  opt.seed = 5;
  const synthetic::Corpus corpus = synthetic::make(opt);
  synthetic::write(corpus, dir.str("corpus.src"), dir.str("corpus.tgt"));
  harness::ExperimentConfig c;
  c.id = "unit";
  c.corpus_src = dir.str("corpus.src");
  c.corpus_tgt = dir.str("corpus.tgt");
  c.n_dev = 20;
  c.n_test = 20;
  c.lm_order = 3;
  c.align_iterations = 3;
  c.beam = 20;
  c.seed = 11;
  return c;
}

std::map<std::string, std::string> stage_hashes(const harness::RunResult& r) {
  std::map<std::string, std::string> out;
  for (const auto& st : r.manifest) out[st.stage] = st.hash;
  return out;
}

}  // namespace

TEST_CASE("config parsing accepts known keys and rejects the rest") {
  const std::vector<std::string> good = {
      "[experiment]",         "id = exp07",
      "src = corpus.pl",      "tgt = corpus.en",
      "fast_align = true",    "stem_align_k = 6",
      "# a comment",          "seed = 99",
      "direction = reverse",  "n_dev = 50",
  };
  const auto c = harness::ExperimentConfig::parse(good, "test");
  CHECK(c.id == "exp07");
  CHECK(c.fast_align);
  CHECK(c.stem_align_k == 6);
  CHECK(c.seed == 99);
  CHECK(c.reverse_direction);
  CHECK(c.n_dev == 50);

  CHECK_THROWS_WITH_AS(
      harness::ExperimentConfig::parse({"src = a", "tgt = b", "turbo = yes"},
                                       "test"),
      doctest::Contains("unknown config key"), Error);
  CHECK_THROWS_AS(harness::ExperimentConfig::parse({"src = a"}, "test"), Error);
  CHECK_THROWS_AS(
      harness::ExperimentConfig::parse({"src = a", "tgt = b", "beam"}, "test"),
      Error);
}

TEST_CASE("out-of-scope experiment keys fail loudly") {
  for (const char* key :
       {"osm", "factored", "hierarchical", "target_syntax", "wmt13", "iwslt13"}) {
    CHECK_THROWS_WITH_AS(
        harness::ExperimentConfig::parse(
            {"src = a", "tgt = b", std::string(key) + " = true"}, "test"),
        doctest::Contains("not implemented"), Error);
  }
}

TEST_CASE("run_experiment is deterministic and caches stages") {
  TempDir dir("mtsmt_harness_run");
  const auto config = small_config(dir);
  const std::string cache = dir.str("cache");

  const auto first = harness::run_experiment(config, cache);
  const auto second = harness::run_experiment(config, cache);
  CHECK(metrics::report_row(first.report) == metrics::report_row(second.report));

  // The second run reuses every stage.
  for (const auto& st : second.manifest) CHECK(st.cached);

  // Deleting the cache reproduces the identical report.
  fs::remove_all(cache);
  const auto third = harness::run_experiment(config, cache);
  CHECK(metrics::report_row(first.report) == metrics::report_row(third.report));
  for (const auto& st : third.manifest) CHECK_FALSE(st.cached);

  // The pipeline produced a sane report on the synthetic corpus.
  CHECK(first.report.bleu > 10.0);
  CHECK(first.report.ter < 200.0);
}

TEST_CASE("toggling the LM smoother only invalidates downstream stages") {
  TempDir dir("mtsmt_harness_toggle");
  auto config = small_config(dir);
  const std::string cache = dir.str("cache");
  const auto base = stage_hashes(harness::run_experiment(config, cache));
  config.witten_bell = true;
  const auto wb_run = harness::run_experiment(config, cache);
  const auto wb = stage_hashes(wb_run);
  CHECK(base.at("prepare") == wb.at("prepare"));
  CHECK(base.at("align") == wb.at("align"));
  CHECK(base.at("phrase") == wb.at("phrase"));
  CHECK(base.at("lm") != wb.at("lm"));
  CHECK(base.at("decode") != wb.at("decode"));
  CHECK(base.at("score") != wb.at("score"));
  // Upstream artifacts were served from the cache.
  for (const auto& st : wb_run.manifest)
    if (st.stage == "prepare" || st.stage == "align" || st.stage == "phrase")
      CHECK(st.cached);
}

TEST_CASE("manifest JSON lists stages, hashes and the report") {
  TempDir dir("mtsmt_harness_manifest");
  const auto config = small_config(dir);
  const auto result = harness::run_experiment(config, dir.str("cache"));
  const std::string path = dir.str("manifest.json");
  harness::write_manifest(config, result, path);
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  CHECK(text.find("\"experiment\"") != std::string::npos);
  CHECK(text.find("\"stages\"") != std::string::npos);
  CHECK(text.find("\"prepare\"") != std::string::npos);
  CHECK(text.find("\"bleu\"") != std::string::npos);
}

TEST_CASE("missing corpus files abort with the stage name and path") {
  harness::ExperimentConfig c;
  c.corpus_src = "does-not-exist.src";
  c.corpus_tgt = "does-not-exist.tgt";
  TempDir dir("mtsmt_harness_missing");
  CHECK_THROWS_WITH_AS(harness::run_experiment(c, dir.str("cache")),
                       doctest::Contains("does-not-exist"), Error);
}

TEST_CASE("suite produces one row per config with a baseline delta") {
  TempDir dir("mtsmt_harness_suite");
  auto base = small_config(dir);
  base.id = "exp00";
  auto wb = base;
  wb.id = "exp09";
  wb.witten_bell = true;
  auto broken = base;
  broken.id = "broken";
  broken.corpus_src = "missing.src";

  const auto rows = harness::run_suite({base, wb, broken}, dir.str("cache"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].id == "exp00");
  CHECK(rows[0].ok);
  CHECK(rows[1].ok);
  CHECK_FALSE(rows[2].ok);

  const std::string table = harness::format_suite_table(rows);
  CHECK(table.find("System\tBLEU") != std::string::npos);
  CHECK(table.find("exp00") != std::string::npos);
  CHECK(table.find("+0.00") != std::string::npos);  // baseline delta
  CHECK(table.find("ERROR") != std::string::npos);

  CHECK_THROWS_AS(harness::run_suite({}, dir.str("cache")), Error);
}

TEST_CASE("emea pair validation happens before any network use") {
  CHECK_THROWS_AS(harness::emea_url("nope"), Error);
  CHECK_THROWS_AS(harness::emea_url("PL-EN"), Error);
  CHECK_THROWS_AS(harness::emea_url("pl-pl"), Error);
  CHECK_THROWS_AS(harness::emea_url("p-l"), Error);
  // Pairs normalize to alphabetical order.
  CHECK(harness::emea_url("pl-en") ==
        "https://object.pouta.csc.fi/OPUS-EMEA/v3/moses/en-pl.txt.zip");
  CHECK(harness::emea_url("en-pl") == harness::emea_url("pl-en"));
}

namespace {

// Minimal stored-method zip writer for exercising the extractor offline.
std::string zip_bytes(const std::vector<std::pair<std::string, std::string>>& entries,
                      bool corrupt_crc = false) {
  std::string out;
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
  };
  auto put32 = [&](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  };
  struct Central {
    std::string name;
    std::uint32_t crc, size, offset;
  };
  std::vector<Central> centrals;
  for (const auto& [name, content] : entries) {
    const auto offset = static_cast<std::uint32_t>(out.size());
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()),
              static_cast<uInt>(content.size())));
    if (corrupt_crc) crc ^= 0xdeadbeef;
    put32(0x04034b50);
    put16(20); put16(0); put16(0); put16(0); put16(0);
    put32(crc);
    put32(static_cast<std::uint32_t>(content.size()));
    put32(static_cast<std::uint32_t>(content.size()));
    put16(static_cast<std::uint16_t>(name.size()));
    put16(0);
    out += name;
    out += content;
    centrals.push_back({name, crc, static_cast<std::uint32_t>(content.size()), offset});
  }
  const auto cd_start = static_cast<std::uint32_t>(out.size());
  for (const auto& c : centrals) {
    put32(0x02014b50);
    put16(20); put16(20); put16(0); put16(0); put16(0); put16(0);
    put32(c.crc);
    put32(c.size);
    put32(c.size);
    put16(static_cast<std::uint16_t>(c.name.size()));
    put16(0); put16(0); put16(0); put16(0);
    put32(0);
    put32(c.offset);
    out += c.name;
  }
  const auto cd_size = static_cast<std::uint32_t>(out.size()) - cd_start;
  put32(0x06054b50);
  put16(0); put16(0);
  put16(static_cast<std::uint16_t>(centrals.size()));
  put16(static_cast<std::uint16_t>(centrals.size()));
  put32(cd_size);
  put32(cd_start);
  put16(0);
  return out;
}

}  // namespace

TEST_CASE("zip extraction verifies checksums and handles stored entries") {
  TempDir dir("mtsmt_zip");
  const std::string zip_path = dir.str("fixture.zip");
  std::ofstream(zip_path, std::ios::binary)
      << zip_bytes({{"EMEA.en-pl.en", "hello\nworld\n"},
                    {"EMEA.en-pl.pl", "czesc\nswiecie\n"}});
  const auto files = harness::unzip_to(zip_path, dir.str("out"));
  REQUIRE(files.size() == 2);
  const auto lines = read_lines(files[0]);
  CHECK(lines == std::vector<std::string>{"hello", "world"});

  const std::string bad_path = dir.str("bad.zip");
  std::ofstream(bad_path, std::ios::binary)
      << zip_bytes({{"x.txt", "data"}}, /*corrupt_crc=*/true);
  CHECK_THROWS_WITH_AS(harness::unzip_to(bad_path, dir.str("out2")),
                       doctest::Contains("checksum"), Error);

  const std::string not_zip = dir.str("not.zip");
  std::ofstream(not_zip, std::ios::binary) << "plain text, no archive";
  CHECK_THROWS_AS(harness::unzip_to(not_zip, dir.str("out3")), FormatError);
}
