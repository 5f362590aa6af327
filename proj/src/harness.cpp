#include "mtsmt/harness.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mtsmt/align.hpp"
#include "mtsmt/common.hpp"
#include "mtsmt/corpus.hpp"
#include "mtsmt/decode.hpp"
#include "mtsmt/error.hpp"
#include "mtsmt/lm.hpp"
#include "mtsmt/phrase.hpp"

namespace fs = std::filesystem;

namespace mtsmt::harness {

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw Error("config key '" + key + "': expected a boolean, got '" + v + "'");
}

const std::map<std::string, std::string> kRejectedKeys = {
    {"osm",
     "the operation sequence model (experiment 02) is not implemented by "
     "this toolkit"},
    {"factored",
     "factored/POS phrase models (experiment 03) are not implemented by this "
     "toolkit"},
    {"hierarchical",
     "hierarchical phrase-based models and chart decoding (experiment 04) "
     "are not implemented by this toolkit"},
    {"target_syntax",
     "target-syntax models (experiment 05) are not implemented by this "
     "toolkit"},
    {"wmt13",
     "the WMT'13 configuration bundle (experiment 08) is not implemented by "
     "this toolkit"},
    {"iwslt13",
     "the IWSLT'13 configuration bundle (experiment 12) is not implemented "
     "by this toolkit"},
};

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::vector<std::string>& lines,
                                         const std::string& origin) {
  ExperimentConfig c;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    if (line == "[experiment]") continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(origin + " line " + std::to_string(i + 1) +
                  ": expected key = value");
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t");
      if (x == std::string::npos) return std::string();
      const auto y = s.find_last_not_of(" \t");
      return s.substr(x, y - x + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto rejected = kRejectedKeys.find(key);
    if (rejected != kRejectedKeys.end())
      throw Error(origin + ": config key '" + key + "' rejected: " +
                  rejected->second);
    if (key == "id") c.id = value;
    else if (key == "src") c.corpus_src = value;
    else if (key == "tgt") c.corpus_tgt = value;
    else if (key == "source_lang") c.source_lang = value;
    else if (key == "target_lang") c.target_lang = value;
    else if (key == "direction") {
      if (value == "forward") c.reverse_direction = false;
      else if (value == "reverse") c.reverse_direction = true;
      else throw Error(origin + ": direction must be forward or reverse");
    } else if (key == "truecase") c.truecase = parse_bool(key, value);
    else if (key == "stem_align_k") c.stem_align_k = std::stoul(value);
    else if (key == "fast_align") c.fast_align = parse_bool(key, value);
    else if (key == "witten_bell") c.witten_bell = parse_bool(key, value);
    else if (key == "hier_mslr") c.hier_mslr = parse_bool(key, value);
    else if (key == "compound_split") c.compound_split = parse_bool(key, value);
    else if (key == "lm_order") c.lm_order = std::stoi(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "beam") c.beam = std::stoi(value);
    else if (key == "distortion") c.distortion = std::stoi(value);
    else if (key == "n_dev") c.n_dev = std::stoul(value);
    else if (key == "n_test") c.n_test = std::stoul(value);
    else if (key == "max_len") c.max_len = std::stoul(value);
    else if (key == "max_ratio") c.max_ratio = std::stod(value);
    else if (key == "max_phrase_len") c.max_phrase_len = std::stoi(value);
    else if (key == "align_iterations") c.align_iterations = std::stoi(value);
    else if (key == "tune") c.tune = parse_bool(key, value);
    else if (key == "tune_restarts") c.tune_restarts = std::stoi(value);
    else if (key == "tune_iterations") c.tune_iterations = std::stoi(value);
    else
      throw Error(origin + ": unknown config key '" + key + "'");
  }
  if (c.corpus_src.empty() || c.corpus_tgt.empty())
    throw Error(origin + ": config must set src and tgt corpus paths");
  return c;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  return parse(read_lines(path), path);
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "id=" << id << "\nsrc=" << corpus_src << "\ntgt=" << corpus_tgt
      << "\nsource_lang=" << source_lang << "\ntarget_lang=" << target_lang
      << "\ndirection=" << (reverse_direction ? "reverse" : "forward")
      << "\ntruecase=" << truecase << "\nstem_align_k=" << stem_align_k
      << "\nfast_align=" << fast_align << "\nwitten_bell=" << witten_bell
      << "\nhier_mslr=" << hier_mslr << "\ncompound_split=" << compound_split
      << "\nlm_order=" << lm_order << "\nseed=" << seed << "\nbeam=" << beam
      << "\ndistortion=" << distortion << "\nn_dev=" << n_dev
      << "\nn_test=" << n_test << "\nmax_len=" << max_len
      << "\nmax_ratio=" << max_ratio << "\nmax_phrase_len=" << max_phrase_len
      << "\nalign_iterations=" << align_iterations << "\ntune=" << tune
      << "\ntune_restarts=" << tune_restarts
      << "\ntune_iterations=" << tune_iterations << "\n";
  return out.str();
}

namespace {

// Scoped advisory lock so concurrent suites never build one cache entry
// twice or tear each other's half-written artifacts.
class DirLock {
 public:
  explicit DirLock(const std::string& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ >= 0) ::flock(fd_, LOCK_EX);
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }

 private:
  int fd_ = -1;
};

struct StageContext {
  const ExperimentConfig& config;
  std::string cache_dir;
  std::vector<StageArtifact>* manifest;
};

// Runs `build` into a content-addressed directory unless it is already
// marked done; returns the stage directory.
template <typename BuildFn>
std::string run_stage(StageContext& ctx, const std::string& stage,
                      std::uint64_t input_hash, BuildFn&& build) {
  const std::string hash = to_hex(input_hash);
  const fs::path dir = fs::path(ctx.cache_dir) / (stage + "-" + hash);
  const fs::path done = dir / ".done";
  StageArtifact art;
  art.stage = stage;
  art.hash = hash;
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  {
    DirLock lock((dir / ".lock").string());
    if (!fs::exists(done)) {
      try {
        build(dir.string());
      } catch (const std::exception& e) {
        throw Error("stage '" + stage + "' failed: " + e.what());
      }
      std::ofstream(done.string()) << "ok\n";
    } else {
      art.cached = true;
    }
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name != ".done" && name != ".lock") art.outputs.push_back(entry.path().string());
  }
  std::sort(art.outputs.begin(), art.outputs.end());
  art.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              started)
                    .count();
  ctx.manifest->push_back(art);
  return dir.string();
}

std::uint64_t hash_strings(std::initializer_list<std::string> parts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : parts) {
    h = fnv1a(p, h);
    h = fnv1a("\x1f", h);
  }
  return h;
}

struct PreparedPaths {
  std::string train_src, train_tgt, dev_src, dev_tgt, test_src, test_tgt;
};

PreparedPaths prepared_paths(const std::string& dir) {
  return {dir + "/train.src", dir + "/train.tgt", dir + "/dev.src",
          dir + "/dev.tgt",   dir + "/test.src",  dir + "/test.tgt"};
}

void build_prepare(const ExperimentConfig& c, const std::string& dir) {
  auto src_lines = read_lines(c.corpus_src);
  auto tgt_lines = read_lines(c.corpus_tgt);
  if (c.reverse_direction) std::swap(src_lines, tgt_lines);
  if (src_lines.size() != tgt_lines.size())
    throw Error("corpus sides differ in line count");

  std::vector<std::string> drop_log;
  ParallelCorpus corpus;
  corpus.source_lang = c.reverse_direction ? c.target_lang : c.source_lang;
  corpus.target_lang = c.reverse_direction ? c.source_lang : c.target_lang;
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    std::string s = src_lines[i], t = tgt_lines[i];
    if (c.truecase) {
      s = normalize_punctuation(s);
      t = normalize_punctuation(t);
    }
    SentencePair pair;
    try {
      pair.source = tokenize(s);
      pair.target = tokenize(t);
    } catch (const EncodingError& e) {
      throw Error("line " + std::to_string(i + 1) + ": " + e.what());
    }
    pair.line_number = i + 1;
    const CleanDecision d = clean_pair(pair, c.max_len, c.max_ratio);
    if (!d.keep) {
      drop_log.push_back(std::to_string(i + 1) + "\t" +
                         drop_reason_name(d.reason));
      continue;
    }
    corpus.pairs.push_back(std::move(pair));
  }
  write_lines(dir + "/drop.log", drop_log);

  SplitResult split = split_corpus(corpus, c.n_dev, c.n_test, c.seed);

  auto lowercase_corpus = [](ParallelCorpus& cc) {
    for (auto& p : cc.pairs) {
      for (auto& tok : p.source) tok = utf8::lower_copy(tok);
      for (auto& tok : p.target) tok = utf8::lower_copy(tok);
    }
  };
  if (c.truecase) {
    std::vector<Sentence> train_src_side, train_tgt_side;
    for (const auto& p : split.train.pairs) {
      train_src_side.push_back(p.source);
      train_tgt_side.push_back(p.target);
    }
    const TruecaseModel src_model = train_truecaser(train_src_side);
    const TruecaseModel tgt_model = train_truecaser(train_tgt_side);
    auto apply = [&](ParallelCorpus& cc) {
      for (auto& p : cc.pairs) {
        p.source = truecase(p.source, src_model);
        p.target = truecase(p.target, tgt_model);
      }
    };
    apply(split.train);
    apply(split.dev);
    apply(split.test);
  } else {
    lowercase_corpus(split.train);
    lowercase_corpus(split.dev);
    lowercase_corpus(split.test);
  }

  if (c.compound_split) {
    std::vector<Sentence> train_src_side;
    for (const auto& p : split.train.pairs) train_src_side.push_back(p.source);
    const Vocabulary vocab = build_vocabulary(train_src_side);
    auto apply = [&](ParallelCorpus& cc) {
      for (auto& p : cc.pairs)
        p.source = phrase::apply_compound_split(p.source, vocab);
    };
    apply(split.train);
    apply(split.dev);
    apply(split.test);
  }

  const PreparedPaths p = prepared_paths(dir);
  write_corpus(p.train_src, p.train_tgt, split.train);
  write_corpus(p.dev_src, p.dev_tgt, split.dev);
  write_corpus(p.test_src, p.test_tgt, split.test);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c, const std::string& cache_dir) {
  RunResult result;
  StageContext ctx{c, cache_dir, &result.manifest};
  fs::create_directories(cache_dir);

  // prepare
  const std::uint64_t corpus_digest =
      hash_strings({to_hex(file_digest(c.corpus_src)),
                    to_hex(file_digest(c.corpus_tgt))});
  std::ostringstream prep_cfg;
  prep_cfg << "prepare:" << c.reverse_direction << ':' << c.truecase << ':'
           << c.compound_split << ':' << c.max_len << ':' << c.max_ratio << ':'
           << c.seed << ':' << c.n_dev << ':' << c.n_test;
  const std::uint64_t prep_hash =
      hash_strings({prep_cfg.str(), to_hex(corpus_digest)});
  const std::string prep_dir = run_stage(
      ctx, "prepare", prep_hash,
      [&](const std::string& dir) { build_prepare(c, dir); });
  const PreparedPaths paths = prepared_paths(prep_dir);

  // lm
  const std::uint64_t lm_hash = hash_strings(
      {"lm", to_hex(prep_hash), std::to_string(c.lm_order),
       c.witten_bell ? "wb" : "kn"});
  const std::string lm_dir =
      run_stage(ctx, "lm", lm_hash, [&](const std::string& dir) {
        const auto side = load_side(paths.train_tgt);
        const auto counts = lm::count_ngrams(side, c.lm_order);
        const lm::NGramModel model = c.witten_bell
                                         ? lm::estimate_witten_bell(counts)
                                         : lm::estimate_kneser_ney(counts);
        lm::serialize(model, dir + "/lm.bin");
      });

  // align
  std::ostringstream align_cfg;
  align_cfg << "align:" << (c.fast_align ? "fa" : "m1") << ':'
            << c.align_iterations << ':' << c.stem_align_k;
  const std::uint64_t align_hash =
      hash_strings({align_cfg.str(), to_hex(prep_hash)});
  const std::string align_dir =
      run_stage(ctx, "align", align_hash, [&](const std::string& dir) {
        const ParallelCorpus train = load_parallel(paths.train_src, paths.train_tgt);
        align::AlignerConfig acfg;
        acfg.kind = c.fast_align ? align::AlignerConfig::Kind::fast_align
                                 : align::AlignerConfig::Kind::model1;
        acfg.iterations = c.align_iterations;
        acfg.stem_k = c.stem_align_k;
        const align::TrainedAligner aligner = align::train_aligner(train, acfg);
        aligner.save(dir + "/aligner.txt");
        const auto links = align::align_corpus(aligner, train);
        std::vector<std::string> lines;
        lines.reserve(links.size());
        for (const auto& l : links) lines.push_back(align::to_pharaoh(l));
        write_lines(dir + "/alignments.pharaoh", lines);
      });

  // phrase tables + reordering
  const phrase::ReorderingScheme scheme =
      c.hier_mslr ? phrase::ReorderingScheme::hier_mslr_bidirectional
                  : phrase::ReorderingScheme::msd_bidirectional;
  std::ostringstream phrase_cfg;
  phrase_cfg << "phrase:" << c.max_phrase_len << ':' << phrase::scheme_name(scheme);
  const std::uint64_t phrase_hash =
      hash_strings({phrase_cfg.str(), to_hex(prep_hash), to_hex(align_hash)});
  const std::string phrase_dir =
      run_stage(ctx, "phrase", phrase_hash, [&](const std::string& dir) {
        const ParallelCorpus train = load_parallel(paths.train_src, paths.train_tgt);
        const align::TrainedAligner aligner =
            align::TrainedAligner::load(align_dir + "/aligner.txt");
        const auto pharaoh = read_lines(align_dir + "/alignments.pharaoh");
        if (pharaoh.size() != train.pairs.size())
          throw Error("alignment count differs from training corpus");
        std::vector<align::AlignmentLinks> links(pharaoh.size());
        for (std::size_t i = 0; i < pharaoh.size(); ++i)
          links[i] = align::from_pharaoh(
              pharaoh[i], static_cast<int>(train.pairs[i].source.size()),
              static_cast<int>(train.pairs[i].target.size()));
        const auto extracted =
            phrase::extract_corpus(train, links, c.max_phrase_len);
        const phrase::PhraseTable table = phrase::score_phrase_table(
            extracted, aligner.forward, aligner.backward,
            aligner.config.stem_k);
        table.save(dir + "/phrase-table");
        const phrase::ReorderingModel reordering = phrase::train_reordering(
            train, links, scheme, 0.5, c.max_phrase_len);
        reordering.save(dir + "/reordering-table");
      });

  // weights (tuned or defaults)
  decode::Weights weights = decode::Weights::defaults(scheme);
  std::string weights_path;
  if (c.tune) {
    std::ostringstream tune_cfg;
    tune_cfg << "tune:" << c.tune_restarts << ':' << c.tune_iterations << ':'
             << c.seed << ':' << c.beam << ':' << c.distortion;
    const std::uint64_t tune_hash = hash_strings(
        {tune_cfg.str(), to_hex(phrase_hash), to_hex(lm_hash)});
    const std::string tune_dir =
        run_stage(ctx, "tune", tune_hash, [&](const std::string& dir) {
          const phrase::PhraseTable table =
              phrase::PhraseTable::load(phrase_dir + "/phrase-table");
          const lm::NGramModel lmodel = lm::deserialize(lm_dir + "/lm.bin");
          const phrase::ReorderingModel reordering =
              phrase::ReorderingModel::load(phrase_dir + "/reordering-table");
          decode::Models models{&table, &lmodel, &reordering};
          const auto dev_src = load_side(paths.dev_src);
          const auto dev_tgt = load_side(paths.dev_tgt);
          std::vector<metrics::Refs> refs;
          refs.reserve(dev_tgt.size());
          for (const auto& s : dev_tgt) refs.push_back({s});
          decode::TuneConfig tc;
          tc.restarts = c.tune_restarts;
          tc.iterations = c.tune_iterations;
          tc.seed = c.seed;
          tc.decoder.beam_size = c.beam;
          tc.decoder.distortion_limit = c.distortion;
          tc.decoder.max_phrase_len = c.max_phrase_len;
          const decode::Weights tuned = decode::tune_weights(
              dev_src, refs, models, decode::Weights::defaults(scheme), tc);
          tuned.save(dir + "/weights.txt");
        });
    weights_path = tune_dir + "/weights.txt";
    weights = decode::Weights::load(weights_path);
  }

  // decode test set
  std::ostringstream dec_cfg;
  dec_cfg << "decode:" << c.beam << ':' << c.distortion << ':'
          << (c.tune ? "tuned" : "default");
  const std::uint64_t decode_hash = hash_strings(
      {dec_cfg.str(), to_hex(phrase_hash), to_hex(lm_hash),
       weights_path.empty() ? std::string("default-weights") : weights_path});
  const std::string decode_dir =
      run_stage(ctx, "decode", decode_hash, [&](const std::string& dir) {
        const phrase::PhraseTable table =
            phrase::PhraseTable::load(phrase_dir + "/phrase-table");
        const lm::NGramModel lmodel = lm::deserialize(lm_dir + "/lm.bin");
        const phrase::ReorderingModel reordering =
            phrase::ReorderingModel::load(phrase_dir + "/reordering-table");
        decode::Models models{&table, &lmodel, &reordering};
        decode::DecoderConfig dc;
        dc.beam_size = c.beam;
        dc.distortion_limit = c.distortion;
        dc.max_phrase_len = c.max_phrase_len;
        const auto test_src = load_side(paths.test_src);
        const auto results = decode::decode_corpus(test_src, models, weights, dc);
        std::vector<std::string> lines;
        lines.reserve(results.size());
        for (const auto& r : results) lines.push_back(join(r.translation));
        write_lines(dir + "/test.hyp", lines);
      });

  // score
  const std::uint64_t score_hash =
      hash_strings({"score", to_hex(decode_hash), to_hex(prep_hash)});
  run_stage(ctx, "score", score_hash, [&](const std::string& dir) {
    const metrics::EvaluationReport report =
        metrics::evaluate_files(decode_dir + "/test.hyp", {paths.test_tgt});
    std::ofstream out(dir + "/report.tsv");
    out << metrics::report_header() << '\n' << metrics::report_row(report) << '\n';
  });
  // Reports are read back from the cache so cached and fresh runs produce
  // byte-identical rows.
  const std::string report_file = (fs::path(cache_dir) /
                                   ("score-" + to_hex(score_hash)) /
                                   "report.tsv")
                                      .string();
  const auto lines = read_lines(report_file);
  if (lines.size() < 2) throw Error("score stage produced no report");
  const auto cols = split_ws(lines[1]);
  if (cols.size() != 5) throw Error("malformed report row");
  result.report.bleu = std::stod(cols[0]);
  result.report.nist = std::stod(cols[1]);
  result.report.meteor = std::stod(cols[2]);
  result.report.ribes = std::stod(cols[3]);
  result.report.ter = std::stod(cols[4]);
  return result;
}

void write_manifest(const ExperimentConfig& config, const RunResult& result,
                    const std::string& path) {
  nlohmann::json j;
  j["experiment"] = config.id;
  j["config"] = config.canonical();
  j["report"] = {{"bleu", result.report.bleu},
                 {"nist", result.report.nist},
                 {"meteor", result.report.meteor},
                 {"ribes", result.report.ribes},
                 {"ter", result.report.ter}};
  j["stages"] = nlohmann::json::array();
  for (const auto& st : result.manifest)
    j["stages"].push_back({{"stage", st.stage},
                           {"hash", st.hash},
                           {"outputs", st.outputs},
                           {"seconds", st.seconds},
                           {"cached", st.cached}});
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

std::vector<SuiteRow> run_suite(const std::vector<ExperimentConfig>& configs,
                                const std::string& cache_dir) {
  if (configs.empty()) throw Error("suite: no experiment configs");
  std::vector<SuiteRow> rows;
  for (const auto& c : configs) {
    SuiteRow row;
    row.id = c.id;
    try {
      row.report = run_experiment(c, cache_dir).report;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_suite_table(const std::vector<SuiteRow>& rows) {
  std::ostringstream out;
  out << "System\t" << metrics::report_header() << "\tdBLEU\n";
  const SuiteRow* baseline = nullptr;
  for (const auto& r : rows)
    if (r.ok) {
      baseline = &r;
      break;
    }
  char buf[32];
  for (const auto& r : rows) {
    if (!r.ok) {
      out << r.id << "\tERROR: " << r.error << '\n';
      continue;
    }
    out << r.id << '\t' << metrics::report_row(r.report);
    if (baseline) {
      std::snprintf(buf, sizeof(buf), "%+.2f", r.report.bleu - baseline->report.bleu);
      out << '\t' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mtsmt::harness
