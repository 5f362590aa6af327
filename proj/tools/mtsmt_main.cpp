// mtsmt: corpus preparation, language modeling, word alignment, phrase
// table building, decoding, evaluation and experiment management in one
// binary. Run `mtsmt --help` for the subcommand list.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mtsmt/align.hpp"
#include "mtsmt/common.hpp"
#include "mtsmt/corpus.hpp"
#include "mtsmt/decode.hpp"
#include "mtsmt/error.hpp"
#include "mtsmt/harness.hpp"
#include "mtsmt/lm.hpp"
#include "mtsmt/metrics.hpp"
#include "mtsmt/phrase.hpp"

namespace fs = std::filesystem;
using namespace mtsmt;

namespace {

struct CommonArgs {
  std::string in, out;
};

std::vector<align::AlignmentLinks> load_pharaoh_file(
    const std::string& path, const ParallelCorpus& corpus) {
  const auto lines = read_lines(path);
  if (lines.size() != corpus.pairs.size())
    throw Error("alignment file has " + std::to_string(lines.size()) +
                " lines, corpus has " + std::to_string(corpus.pairs.size()));
  std::vector<align::AlignmentLinks> links(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i)
    links[i] = align::from_pharaoh(
        lines[i], static_cast<int>(corpus.pairs[i].source.size()),
        static_cast<int>(corpus.pairs[i].target.size()));
  return links;
}

int run(int argc, char** argv) {
  CLI::App app{"mtsmt - a small phrase-based statistical machine translation "
               "toolkit"};
  app.require_subcommand(1);

  // --- corpus subcommands ---
  std::string in_path, out_path, lang;
  bool do_norm = false;
  auto* tok = app.add_subcommand("tokenize", "Tokenize raw text, one sentence per line");
  tok->add_option("--in", in_path)->required();
  tok->add_option("--out", out_path)->required();
  tok->add_option("--lang", lang);
  tok->add_flag("--normalize-punct", do_norm, "Normalize punctuation first");
  tok->callback([&] {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write " + out_path);
    std::size_t lineno = 0;
    for (const auto& line : read_lines(in_path)) {
      ++lineno;
      try {
        const std::string text = do_norm ? normalize_punctuation(line) : line;
        out << join(tokenize(text, lang)) << '\n';
      } catch (const EncodingError& e) {
        throw Error("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  });

  std::string src_path, tgt_path, out_src, out_tgt, drop_log_path, scriptsated;
  std::size_t max_len = 80;
  double max_ratio = 9.0;
  std::string scripts;
  double noise_threshold = 0.2;
  auto* clean = app.add_subcommand("clean", "Drop over-long, empty, off-ratio and noisy pairs");
  clean->add_option("--src", src_path)->required();
  clean->add_option("--tgt", tgt_path)->required();
  clean->add_option("--out-src", out_src)->required();
  clean->add_option("--out-tgt", out_tgt)->required();
  clean->add_option("--max-len", max_len, "Maximum tokens per side");
  clean->add_option("--max-ratio", max_ratio, "Length ratio limit; 0 disables");
  clean->add_option("--drop-log", drop_log_path, "Write line<TAB>reason for drops");
  clean->add_option("--scripts", scripts,
                    "Comma-separated allowed scripts (latin,cyrillic,greek); "
                    "enables the noise filter");
  clean->add_option("--noise-threshold", noise_threshold);
  clean->callback([&] {
    std::vector<std::string> drop_log;
    ParallelCorpus corpus = load_parallel(src_path, tgt_path, &drop_log);
    std::vector<utf8::Script> allowed;
    if (!scripts.empty()) {
      std::stringstream ss(scripts);
      std::string name;
      while (std::getline(ss, name, ','))
        allowed.push_back(utf8::script_from_name(name));
    }
    ParallelCorpus kept;
    kept.source_lang = corpus.source_lang;
    kept.target_lang = corpus.target_lang;
    for (const auto& pair : corpus.pairs) {
      CleanDecision d = clean_pair(pair, max_len, max_ratio);
      if (d.keep && !allowed.empty()) {
        d = filter_noise(pair.source, allowed, noise_threshold);
        if (d.keep) d = filter_noise(pair.target, allowed, noise_threshold);
      }
      if (!d.keep) {
        drop_log.push_back(std::to_string(pair.line_number) + "\t" +
                           drop_reason_name(d.reason));
        continue;
      }
      kept.pairs.push_back(pair);
    }
    write_corpus(out_src, out_tgt, kept);
    if (!drop_log_path.empty()) write_lines(drop_log_path, drop_log);
  });

  std::string model_path;
  auto* tc_train = app.add_subcommand("truecase-train", "Learn a truecasing model");
  tc_train->add_option("--in", in_path)->required();
  tc_train->add_option("--model", model_path)->required();
  tc_train->callback([&] {
    train_truecaser(load_side(in_path)).save(model_path);
  });

  auto* tc_apply = app.add_subcommand("truecase-apply", "Apply a truecasing model");
  tc_apply->add_option("--in", in_path)->required();
  tc_apply->add_option("--model", model_path)->required();
  tc_apply->add_option("--out", out_path)->required();
  tc_apply->callback([&] {
    const TruecaseModel model = TruecaseModel::load(model_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write " + out_path);
    for (const auto& s : load_side(in_path)) out << join(truecase(s, model)) << '\n';
  });

  std::string out_prefix;
  std::size_t n_dev = 1000, n_test = 1000;
  std::uint64_t seed = 1;
  auto* split_cmd = app.add_subcommand("split", "Carve seeded dev/test sets out of a corpus");
  split_cmd->add_option("--src", src_path)->required();
  split_cmd->add_option("--tgt", tgt_path)->required();
  split_cmd->add_option("--out-prefix", out_prefix)->required();
  split_cmd->add_option("--n-dev", n_dev);
  split_cmd->add_option("--n-test", n_test);
  split_cmd->add_option("--seed", seed);
  split_cmd->callback([&] {
    const ParallelCorpus corpus = load_parallel(src_path, tgt_path);
    const SplitResult r = split_corpus(corpus, n_dev, n_test, seed);
    write_corpus(out_prefix + ".train.src", out_prefix + ".train.tgt", r.train);
    write_corpus(out_prefix + ".dev.src", out_prefix + ".dev.tgt", r.dev);
    write_corpus(out_prefix + ".test.src", out_prefix + ".test.tgt", r.test);
  });

  auto* stats_cmd = app.add_subcommand("stats", "Sentence, token and vocabulary counts");
  stats_cmd->add_option("--src", src_path)->required();
  stats_cmd->add_option("--tgt", tgt_path)->required();
  stats_cmd->callback([&] {
    const CorpusStats st = corpus_stats(load_parallel(src_path, tgt_path));
    std::cout << "sentences\t" << st.sentences << "\nsource_tokens\t"
              << st.source_tokens << "\ntarget_tokens\t" << st.target_tokens
              << "\nsource_vocab\t" << st.source_vocab << "\ntarget_vocab\t"
              << st.target_vocab << '\n';
  });

  // --- language model ---
  int order = 5;
  std::string smoothing = "kn";
  auto* lm_train = app.add_subcommand("lm-train", "Train a backoff n-gram model");
  lm_train->add_option("--in", in_path)->required();
  lm_train->add_option("--out", out_path)->required();
  lm_train->add_option("--order", order);
  lm_train->add_option("--smoothing", smoothing)
      ->check(CLI::IsMember({"kn", "wb"}));
  lm_train->callback([&] {
    const auto counts = lm::count_ngrams(load_side(in_path), order);
    const lm::NGramModel model = smoothing == "kn"
                                     ? lm::estimate_kneser_ney(counts)
                                     : lm::estimate_witten_bell(counts);
    for (const auto& w : model.warnings) std::cerr << "warning: " << w << '\n';
    lm::serialize(model, out_path);
  });

  auto* lm_ppl = app.add_subcommand("lm-perplexity", "Perplexity of a text under a model");
  lm_ppl->add_option("--model", model_path)->required();
  lm_ppl->add_option("--in", in_path)->required();
  lm_ppl->callback([&] {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f",
                  lm::perplexity(lm::deserialize(model_path), load_side(in_path)));
    std::cout << buf << '\n';
  });

  auto* lm_arpa = app.add_subcommand("lm-export-arpa", "Export a model in ARPA text format");
  lm_arpa->add_option("--model", model_path)->required();
  lm_arpa->add_option("--out", out_path)->required();
  lm_arpa->callback([&] { lm::export_arpa(lm::deserialize(model_path), out_path); });

  // --- alignment ---
  auto* align_cmd = app.add_subcommand("align", "Word alignment");
  align_cmd->require_subcommand(1);
  std::string aligner_kind = "model1", heuristic = "grow-diag-final-and";
  int align_iters = 5;
  std::size_t stem_k = 0;
  bool optimize_tension = false;
  auto* align_train = align_cmd->add_subcommand("train", "Train both alignment directions");
  align_train->add_option("--src", src_path)->required();
  align_train->add_option("--tgt", tgt_path)->required();
  align_train->add_option("--out", out_path)->required();
  align_train->add_option("--model", aligner_kind)
      ->check(CLI::IsMember({"model1", "fast-align"}));
  align_train->add_option("--iterations", align_iters);
  align_train->add_option("--stem-k", stem_k, "Stem both sides to k code points first");
  align_train->add_option("--heuristic", heuristic);
  align_train->add_flag("--optimize-tension", optimize_tension);
  align_train->callback([&] {
    align::AlignerConfig cfg;
    cfg.kind = aligner_kind == "model1" ? align::AlignerConfig::Kind::model1
                                        : align::AlignerConfig::Kind::fast_align;
    cfg.iterations = align_iters;
    cfg.stem_k = stem_k;
    cfg.optimize_tension = optimize_tension;
    cfg.heuristic = align::heuristic_from_name(heuristic);
    align::train_aligner(load_parallel(src_path, tgt_path), cfg).save(out_path);
  });

  std::string params_path;
  auto* align_apply = align_cmd->add_subcommand("apply", "Align a corpus, Pharaoh output");
  align_apply->add_option("--src", src_path)->required();
  align_apply->add_option("--tgt", tgt_path)->required();
  align_apply->add_option("--params", params_path)->required();
  align_apply->add_option("--out", out_path)->required();
  align_apply->add_option("--heuristic", heuristic,
                          "Override the symmetrization heuristic");
  align_apply->add_option("--stem-k", stem_k,
                          "Must match the trained parameters when given");
  align_apply->callback([&] {
    align::TrainedAligner aligner = align::TrainedAligner::load(params_path);
    if (align_apply->count("--heuristic"))
      aligner.config.heuristic = align::heuristic_from_name(heuristic);
    if (align_apply->count("--stem-k") && stem_k != aligner.config.stem_k)
      throw Error("--stem-k " + std::to_string(stem_k) +
                  " does not match the trained parameters (" +
                  std::to_string(aligner.config.stem_k) + ")");
    const ParallelCorpus corpus = load_parallel(src_path, tgt_path);
    const auto links = align::align_corpus(aligner, corpus);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write " + out_path);
    for (const auto& l : links) out << align::to_pharaoh(l) << '\n';
  });

  // --- phrases ---
  auto* phrase_cmd = app.add_subcommand("phrase", "Phrase table construction");
  phrase_cmd->require_subcommand(1);
  std::string alignments_path, extract_path, scheme_name_arg = "msd";
  int max_phrase_len = 7;
  auto* ph_extract = phrase_cmd->add_subcommand("extract", "Extract consistent phrase pairs");
  ph_extract->add_option("--src", src_path)->required();
  ph_extract->add_option("--tgt", tgt_path)->required();
  ph_extract->add_option("--alignments", alignments_path)->required();
  ph_extract->add_option("--out", out_path)->required();
  ph_extract->add_option("--max-len", max_phrase_len);
  ph_extract->callback([&] {
    const ParallelCorpus corpus = load_parallel(src_path, tgt_path);
    const auto links = load_pharaoh_file(alignments_path, corpus);
    phrase::save_extract(out_path,
                         phrase::extract_corpus(corpus, links, max_phrase_len));
  });

  auto* ph_score = phrase_cmd->add_subcommand("score", "Score an extract file into a phrase table");
  ph_score->add_option("--extract", extract_path)->required();
  ph_score->add_option("--params", params_path, "Trained aligner (lexical tables)")->required();
  ph_score->add_option("--out", out_path)->required();
  ph_score->callback([&] {
    const align::TrainedAligner aligner = align::TrainedAligner::load(params_path);
    phrase::score_phrase_table(phrase::load_extract(extract_path),
                               aligner.forward, aligner.backward,
                               aligner.config.stem_k)
        .save(out_path);
  });

  auto* ph_reorder = phrase_cmd->add_subcommand("reorder", "Estimate a lexicalized reordering model");
  ph_reorder->add_option("--src", src_path)->required();
  ph_reorder->add_option("--tgt", tgt_path)->required();
  ph_reorder->add_option("--alignments", alignments_path)->required();
  ph_reorder->add_option("--out", out_path)->required();
  ph_reorder->add_option("--scheme", scheme_name_arg)
      ->check(CLI::IsMember({"msd", "hier-mslr"}));
  ph_reorder->add_option("--max-len", max_phrase_len);
  ph_reorder->callback([&] {
    const ParallelCorpus corpus = load_parallel(src_path, tgt_path);
    const auto links = load_pharaoh_file(alignments_path, corpus);
    phrase::train_reordering(corpus, links,
                             phrase::scheme_from_name(scheme_name_arg), 0.5,
                             max_phrase_len)
        .save(out_path);
  });

  std::string vocab_path;
  std::size_t min_part = 3, max_parts = 2;
  auto* csplit = app.add_subcommand("compound-split", "Split compounds by part frequency");
  csplit->add_option("--in", in_path)->required();
  csplit->add_option("--out", out_path)->required();
  csplit->add_option("--vocab-from", vocab_path,
                     "Corpus side supplying word frequencies")->required();
  csplit->add_option("--min-part", min_part);
  csplit->add_option("--max-parts", max_parts);
  csplit->callback([&] {
    const Vocabulary vocab = build_vocabulary(load_side(vocab_path));
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write " + out_path);
    for (const auto& s : load_side(in_path))
      out << join(phrase::apply_compound_split(s, vocab, min_part, max_parts))
          << '\n';
  });

  // --- decoding ---
  std::string table_path, lm_path, reordering_path, weights_path, trace_path;
  int beam = 100, distortion = 6;
  auto* dec = app.add_subcommand("decode", "Translate, one sentence per line");
  dec->add_option("--in", in_path)->required();
  dec->add_option("--out", out_path)->required();
  dec->add_option("--table", table_path)->required();
  dec->add_option("--lm", lm_path)->required();
  dec->add_option("--reordering", reordering_path);
  dec->add_option("--weights", weights_path);
  dec->add_option("--beam", beam);
  dec->add_option("--distortion", distortion);
  dec->add_option("--trace", trace_path, "Write per-step derivations");
  dec->callback([&] {
    const phrase::PhraseTable table = phrase::PhraseTable::load(table_path);
    const lm::NGramModel lmodel = lm::deserialize(lm_path);
    phrase::ReorderingModel reordering;
    decode::Models models{&table, &lmodel, nullptr};
    if (!reordering_path.empty()) {
      reordering = phrase::ReorderingModel::load(reordering_path);
      models.reordering = &reordering;
    }
    decode::Weights weights =
        weights_path.empty()
            ? decode::Weights::defaults(
                  models.reordering ? std::optional(reordering.scheme)
                                    : std::nullopt)
            : decode::Weights::load(weights_path);
    decode::DecoderConfig config;
    config.beam_size = beam;
    config.distortion_limit = distortion;
    const auto sentences = load_side(in_path);
    const auto results = decode::decode_corpus(sentences, models, weights, config);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write " + out_path);
    std::ofstream trace;
    if (!trace_path.empty()) trace.open(trace_path, std::ios::binary);
    for (std::size_t i = 0; i < results.size(); ++i) {
      out << join(results[i].translation) << '\n';
      if (trace.is_open()) {
        for (const auto& step : results[i].derivation) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "%.6g %.6g %.6g %.6g",
                        step.features.phi_fe, step.features.lex_fe,
                        step.features.phi_ef, step.features.lex_ef);
          trace << '[' << step.src_begin << ',' << step.src_end << ") ||| "
                << join(step.tgt) << " ||| " << buf
                << (step.oov ? " oov" : "") << '\n';
        }
        trace << '\n';
      }
      if (results[i].fallback)
        std::cerr << "warning: sentence " << i + 1
                  << ": no complete hypothesis, copy-through fallback\n";
    }
  });

  std::string dev_src_path, dev_ref_path, weights_in, weights_out;
  int tune_restarts = 8, tune_iterations = 30;
  auto* tune_cmd = app.add_subcommand("tune", "Coordinate-ascent weight tuning on dev BLEU");
  tune_cmd->add_option("--dev-src", dev_src_path)->required();
  tune_cmd->add_option("--dev-ref", dev_ref_path)->required();
  tune_cmd->add_option("--table", table_path)->required();
  tune_cmd->add_option("--lm", lm_path)->required();
  tune_cmd->add_option("--reordering", reordering_path);
  tune_cmd->add_option("--weights-in", weights_in);
  tune_cmd->add_option("--weights-out", weights_out)->required();
  tune_cmd->add_option("--seed", seed);
  tune_cmd->add_option("--restarts", tune_restarts);
  tune_cmd->add_option("--iterations", tune_iterations);
  tune_cmd->add_option("--beam", beam);
  tune_cmd->add_option("--distortion", distortion);
  tune_cmd->callback([&] {
    const phrase::PhraseTable table = phrase::PhraseTable::load(table_path);
    const lm::NGramModel lmodel = lm::deserialize(lm_path);
    phrase::ReorderingModel reordering;
    decode::Models models{&table, &lmodel, nullptr};
    if (!reordering_path.empty()) {
      reordering = phrase::ReorderingModel::load(reordering_path);
      models.reordering = &reordering;
    }
    const decode::Weights initial =
        weights_in.empty()
            ? decode::Weights::defaults(
                  models.reordering ? std::optional(reordering.scheme)
                                    : std::nullopt)
            : decode::Weights::load(weights_in);
    decode::TuneConfig tc;
    tc.restarts = tune_restarts;
    tc.iterations = tune_iterations;
    tc.seed = seed;
    tc.decoder.beam_size = beam;
    tc.decoder.distortion_limit = distortion;
    const auto dev_src = load_side(dev_src_path);
    const auto dev_ref = load_side(dev_ref_path);
    if (dev_src.size() != dev_ref.size())
      throw Error("dev source and reference line counts differ");
    std::vector<metrics::Refs> refs;
    refs.reserve(dev_ref.size());
    for (const auto& s : dev_ref) refs.push_back({s});
    decode::tune_weights(dev_src, refs, models, initial, tc).save(weights_out);
  });

  // --- scoring ---
  std::string hyp_path, metric = "all";
  std::vector<std::string> ref_paths;
  bool no_lowercase = false;
  auto* score_cmd = app.add_subcommand("score", "BLEU/NIST/METEOR/RIBES/TER report");
  score_cmd->add_option("--hyp", hyp_path)->required();
  score_cmd->add_option("--refs", ref_paths)->required()->expected(-1);
  score_cmd->add_flag("--no-lowercase", no_lowercase);
  score_cmd->add_option("--metric", metric)
      ->check(CLI::IsMember({"all", "bleu", "nist", "meteor", "ter", "ribes"}));
  score_cmd->callback([&] {
    metrics::EvaluateOptions opts;
    opts.lowercase = !no_lowercase;
    const metrics::EvaluationReport r =
        metrics::evaluate_files(hyp_path, ref_paths, opts);
    char buf[32];
    if (metric == "all") {
      std::cout << metrics::report_header() << '\n'
                << metrics::report_row(r) << '\n';
    } else {
      const double v = metric == "bleu"     ? r.bleu
                       : metric == "nist"   ? r.nist
                       : metric == "meteor" ? r.meteor
                       : metric == "ter"    ? r.ter
                                            : r.ribes;
      std::snprintf(buf, sizeof(buf), "%.2f", v);
      std::cout << buf << '\n';
    }
  });

  // --- harness ---
  std::string config_path, cache_dir = "mtsmt-cache", manifest_path, configs_dir,
              table_out;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment config end to end");
  run_cmd->add_option("--config", config_path)->required();
  run_cmd->add_option("--cache", cache_dir);
  run_cmd->add_option("--manifest", manifest_path, "Write a JSON manifest");
  run_cmd->callback([&] {
    const harness::ExperimentConfig config =
        harness::ExperimentConfig::parse_file(config_path);
    const harness::RunResult result = harness::run_experiment(config, cache_dir);
    if (!manifest_path.empty())
      harness::write_manifest(config, result, manifest_path);
    std::cout << metrics::report_header() << '\n'
              << metrics::report_row(result.report) << '\n';
  });

  auto* suite_cmd = app.add_subcommand("suite", "Run every config in a directory");
  suite_cmd->add_option("--configs", configs_dir)->required();
  suite_cmd->add_option("--cache", cache_dir);
  suite_cmd->add_option("--out", table_out, "Also write the table to a file");
  suite_cmd->callback([&] {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(configs_dir))
      if (entry.path().extension() == ".cfg") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("no .cfg files in " + configs_dir);
    std::vector<harness::ExperimentConfig> configs;
    for (const auto& f : files)
      configs.push_back(harness::ExperimentConfig::parse_file(f));
    const auto rows = harness::run_suite(configs, cache_dir);
    const std::string tbl = harness::format_suite_table(rows);
    std::cout << tbl;
    if (!table_out.empty()) {
      std::ofstream out(table_out);
      out << tbl;
    }
  });

  std::string pair = "pl-en", fetch_dir = "data";
  auto* fetch_cmd = app.add_subcommand("fetch-emea", "Download the OPUS EMEA release for a pair");
  fetch_cmd->add_option("--pair", pair);
  fetch_cmd->add_option("--out", fetch_dir);
  fetch_cmd->callback([&] {
    const harness::FetchResult r = harness::fetch_emea(fetch_dir, pair);
    std::cout << "release\t" << r.release << "\nsource\t" << r.src_path
              << "\ntarget\t" << r.tgt_path << "\nlines\t" << r.line_count
              << '\n';
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
