#include "corrbridge/cli/commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "corrbridge/cli/gradcheck_suite.hpp"
#include "corrbridge/cli/metrics.hpp"
#include "corrbridge/numerics/tape.hpp"
#include "corrbridge/pipelines/parallel.hpp"
#include "corrbridge/pipelines/pipelines.hpp"
#include "corrbridge/training/checkpoint.hpp"
#include "json.hpp"

namespace corrbridge {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_record(const RunConfig& config) {
  json j = {{"type", "config"}, {"build_id", CORRBRIDGE_BUILD_ID}};
  for (const auto& [key, value] : run_config_entries(config)) j[key] = value;
  return j;
}

PivotFiles load_pivot_files(const RunConfig& config) {
  PivotFiles files;
  files.x_kind = config.x_view;
  files.d1_train = read_parallel_tsv(config.d1_train, config.mode);
  files.d1_valid = read_parallel_tsv(config.d1_valid, config.mode);
  files.d2_train = read_parallel_tsv(config.d2_train, config.mode);
  files.d2_valid = read_parallel_tsv(config.d2_valid, config.mode);
  return files;
}

std::size_t longest_source(const PivotFiles& files) {
  std::size_t longest = 0;
  for (const auto* file : {&files.d1_train, &files.d2_train}) {
    const bool features = file == &files.d1_train && files.x_kind == ViewKind::Vector;
    for (const auto& p : file->pairs) {
      longest = std::max(longest, tokenize(features ? p.target : p.source, file->mode).size());
    }
  }
  return longest;
}

std::string join_tokens(const Vocab& vocab, const std::vector<int>& ids, TokenMode mode) {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int id : ids) tokens.push_back(vocab.token(id));
  return detokenize(tokens, mode);
}

/// Refuses test data whose sources are mostly unknown to the checkpoint,
/// which indicates a wrong direction or a different corpus.
void check_vocabulary(const ParallelCorpus& corpus, const std::string& test) {
  std::size_t total = 0, unknown = 0;
  for (const auto& ex : corpus.examples) {
    total += ex.source.size();
    unknown += static_cast<std::size_t>(std::count(ex.source.begin(), ex.source.end(), kUnk));
  }
  if (total > 0 && 2 * unknown > total) {
    throw ConfigError(test + ": " + std::to_string(unknown) + " of " + std::to_string(total) +
                      " source tokens are unknown to the checkpoint vocabulary (wrong checkpoint or direction?)");
  }
}

void check_features(const ParallelCorpus& corpus, std::size_t expected, const std::string& test) {
  if (corpus.source_kind == ViewKind::Vector && corpus.feature_dim != expected) {
    throw ConfigError(test + ": feature vectors have " + std::to_string(corpus.feature_dim) +
                      " dimensions, checkpoint expects " + std::to_string(expected));
  }
}

std::string stored_config(const std::string& checkpoint) {
  auto meta = json::parse(read_checkpoint_file(checkpoint).metadata);
  meta.erase("vocabs");
  meta.erase("trainer");
  for (const char* stage : {"stage1", "stage2"}) {
    if (!meta.contains(stage)) continue;
    meta[stage].erase("source_vocab");
    meta[stage].erase("target_vocab");
    meta[stage].erase("trainer");
  }
  return meta.dump();
}

}  // namespace

std::size_t evaluation_threads() {
  if (const char* env = std::getenv("CORRBRIDGE_THREADS")) {
    std::string text(env);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
      throw ConfigError("CORRBRIDGE_THREADS must be a positive integer, got '" + text + "'");
    }
    return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrainOutcome run_train(const RunConfig& config, const std::string& out_dir, std::size_t threads, std::ostream& log) {
  config.validate();
  config.require_training_data();
  const auto start = Clock::now();
  auto files = load_pivot_files(config);

  ModelConfig model_config = config.model;
  if (config.auto_decode_len) model_config.max_decode_len = default_max_decode_len(longest_source(files));

  fs::create_directories(out_dir);
  TrainOutcome outcome;
  outcome.checkpoint = (fs::path(out_dir) / "model.ckpt").string();
  outcome.metrics = (fs::path(out_dir) / "metrics.jsonl").string();
  std::ofstream metrics(outcome.metrics, std::ios::binary | std::ios::trunc);
  if (!metrics) throw ConfigError("cannot write " + outcome.metrics);
  metrics << config_record(config).dump() << '\n';

  std::size_t grid_index = 0;
  bool in_grid = false;
  double best_so_far = -1.0;
  RunOptions options;
  options.threads = threads;
  options.observer = [&](const EpochLog& e) {
    if (in_grid && e.epoch == 0 && e.stage == "bridge") {
      ++grid_index;
      best_so_far = -1.0;
    }
    best_so_far = std::max(best_so_far, e.valid_accuracy);
    json record = {{"type", in_grid ? "grid_epoch" : "epoch"},
                   {"stage", e.stage},
                   {"epoch", e.epoch},
                   {"correlation_loss", number_or_null(e.correlation_loss)},
                   {"cross_entropy", number_or_null(e.cross_entropy)},
                   {"valid_accuracy", e.valid_accuracy},
                   {"best_valid_accuracy", best_so_far},
                   {"heldout_correlation", number_or_null(e.heldout_correlation)},
                   {"improved", e.improved}};
    if (in_grid) record["grid_point"] = grid_index - 1;
    metrics << record.dump() << '\n';
    metrics.flush();
    log << e.stage << " epoch " << e.epoch << ": valid_acc=" << e.valid_accuracy;
    if (std::isfinite(e.cross_entropy)) log << " ce=" << e.cross_entropy;
    if (std::isfinite(e.correlation_loss)) log << " corr_loss=" << e.correlation_loss;
    if (std::isfinite(e.heldout_correlation)) log << " heldout_corr=" << e.heldout_correlation;
    log << (e.improved ? " *" : "") << '\n';
  };

  TrainConfig train_config = config.train;
  if (config.pipeline == Pipeline::Correlational) {
    auto corpora = build_bridge_corpora(files);
    if (!config.lambda_grid.empty() || !config.learning_rate_grid.empty()) {
      auto lambdas = config.lambda_grid.empty() ? std::vector<double>{config.train.lambda} : config.lambda_grid;
      auto rates = config.learning_rate_grid.empty() ? std::vector<double>{config.train.learning_rate}
                                                     : config.learning_rate_grid;
      std::vector<GridPoint> grid;
      for (double lambda : lambdas) {
        for (double lr : rates) {
          GridPoint point{model_config, config.train};
          point.train.lambda = lambda;
          point.train.learning_rate = lr;
          grid.push_back(point);
        }
      }
      in_grid = true;
      auto report = grid_tune(corpora, grid, options);
      in_grid = false;
      best_so_far = -1.0;
      for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& entry = report.entries[i];
        metrics << json{{"type", "grid"},
                        {"grid_point", i},
                        {"lambda", entry.point.train.lambda},
                        {"learning_rate", entry.point.train.learning_rate},
                        {"valid_accuracy", entry.valid_accuracy},
                        {"best_epoch", entry.best_epoch},
                        {"selected", i == report.best}}
                       .dump()
                << '\n';
      }
      train_config = report.entries[report.best].point.train;
    }
    auto result = train_correlational(corpora, model_config, train_config, options);
    result.model.standardize_at_inference = config.standardize_at_inference;
    save_checkpoint(outcome.checkpoint, result.model, train_config, result.state);
    outcome.best_valid = result.best_valid;
    outcome.best_epoch = result.state.best_epoch;
    outcome.epochs = result.history.size() - 1;
  } else {
    if (!config.lambda_grid.empty() || !config.learning_rate_grid.empty()) {
      throw ConfigError("lambda_grid and learning_rate_grid apply to the correlational pipeline only");
    }
    auto corpora = build_two_stage_corpora(files);
    auto result = train_two_stage(corpora, model_config, train_config, options);
    save_checkpoint(outcome.checkpoint, result.model, train_config, result.stage1_state, result.stage2_state);
    outcome.best_valid = result.stage2_state.best_score;
    outcome.best_epoch = result.stage2_state.best_epoch;
    outcome.epochs = result.history.size();
  }

  metrics << json{{"type", "summary"},
                  {"pipeline", to_string(config.pipeline)},
                  {"best_epoch", outcome.best_epoch},
                  {"best_valid_accuracy", outcome.best_valid},
                  {"lambda", train_config.lambda},
                  {"learning_rate", train_config.learning_rate}}
                 .dump()
          << '\n';

  json report = config_record(config);
  report["type"] = "train_report";
  report["effective_max_decode_len"] = model_config.max_decode_len;
  report["checkpoint"] = outcome.checkpoint;
  report["metrics"] = outcome.metrics;
  report["wall_seconds"] = seconds_since(start);
  std::ofstream(fs::path(out_dir) / "train_report.json") << report.dump(2) << '\n';
  return outcome;
}

EvalReport run_eval(const std::string& checkpoint, const std::string& test, std::optional<std::size_t> beam,
                    bool from_pivot, std::size_t threads) {
  const auto start = Clock::now();
  EvalReport report;
  report.checkpoint = checkpoint;
  report.test = test;
  report.from_pivot = from_pivot;
  report.pipeline = checkpoint_pipeline(checkpoint);
  report.config_json = stored_config(checkpoint);

  std::vector<Hypothesis> outputs;
  std::vector<TwoStageOutput> staged;
  RawParallelFile raw;
  const Vocab* output_vocab = nullptr;
  const Vocab* intermediate_vocab = nullptr;
  TokenMode mode{};

  std::optional<BridgeCheckpoint> bridge;
  std::optional<TwoStageCheckpoint> two_stage;
  if (report.pipeline == "correlational") {
    bridge.emplace(load_bridge_checkpoint(checkpoint));
    const auto& model = bridge->model;
    mode = model.mode;
    raw = read_parallel_tsv(test, mode);
    report.beam_width = beam.value_or(model.config.beam_width);
    report.seed = bridge->train.seed;
    auto kind = from_pivot ? ViewKind::Sequence : model.x_encoder.kind();
    auto corpus = index_corpus(raw, from_pivot ? model.z_vocab : model.x_vocab, model.y_vocab, kind);
    check_features(corpus, model.config.feature_dim, test);
    if (kind == ViewKind::Sequence) check_vocabulary(corpus, test);
    outputs = parallel_map<Hypothesis>(corpus.size(), threads, [&](std::size_t i) {
      const auto& ex = corpus.examples[i];
      return from_pivot ? infer_pivot_to_target(model, ex.source, report.beam_width, model.config.max_decode_len)
                        : infer_bridge(model, ex, report.beam_width, model.config.max_decode_len);
    });
    output_vocab = &model.y_vocab;
  } else {
    two_stage.emplace(load_two_stage_checkpoint(checkpoint));
    const auto& model = two_stage->model;
    mode = model.stage2.mode;
    raw = read_parallel_tsv(test, mode);
    report.beam_width = beam.value_or(model.stage2.config.beam_width);
    report.seed = two_stage->train.seed;
    const auto& entry = from_pivot ? model.stage2 : model.stage1;
    auto corpus = index_corpus(raw, entry.source_vocab, model.stage2.target_vocab, entry.encoder.kind());
    check_features(corpus, entry.config.feature_dim, test);
    if (entry.encoder.kind() == ViewKind::Sequence) check_vocabulary(corpus, test);
    if (from_pivot) {
      outputs = parallel_map<Hypothesis>(corpus.size(), threads, [&](std::size_t i) {
        NoGradScope<float> no_grad;
        auto rep = model.stage2.encoder.encode(corpus.examples[i]);
        return decode(model.stage2.decoder, rep, report.beam_width, model.stage2.config.max_decode_len);
      });
    } else {
      staged = parallel_map<TwoStageOutput>(corpus.size(), threads, [&](std::size_t i) {
        return infer_two_stage(model, corpus.examples[i], report.beam_width, model.stage2.config.max_decode_len);
      });
      for (const auto& s : staged) outputs.push_back(s.output);
      intermediate_vocab = &model.stage1.target_vocab;
    }
    output_vocab = &model.stage2.target_vocab;
  }

  auto references = group_references(raw.pairs);
  std::vector<std::string> hypotheses;
  for (std::size_t i = 0; i < raw.pairs.size(); ++i) {
    EvalExample ex;
    ex.source = raw.pairs[i].source;
    ex.output = join_tokens(*output_vocab, outputs[i].tokens, mode);
    ex.references = references[i];
    if (!staged.empty()) {
      ex.intermediate = join_tokens(*intermediate_vocab, staged[i].intermediate, mode);
      ex.empty_intermediate = staged[i].empty_intermediate;
    }
    ex.correct = compute_accuracy({ex.output}, {ex.references}) == 1.0;
    hypotheses.push_back(ex.output);
    report.examples.push_back(std::move(ex));
  }
  if (hypotheses.empty()) throw DataError(test + ": test file has no examples");
  report.accuracy = compute_accuracy(hypotheses, references);
  report.wall_seconds = seconds_since(start);
  return report;
}

void write_eval_report(const EvalReport& report, const std::string& path) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << json{{"type", "eval"},
              {"checkpoint", report.checkpoint},
              {"test", report.test},
              {"pipeline", report.pipeline},
              {"from_pivot", report.from_pivot},
              {"beam_width", report.beam_width},
              {"accuracy", report.accuracy},
              {"examples", report.examples.size()},
              {"seed", report.seed},
              {"build_id", CORRBRIDGE_BUILD_ID},
              {"wall_seconds", report.wall_seconds},
              {"config", json::parse(report.config_json)}}
             .dump()
      << '\n';
  for (std::size_t i = 0; i < report.examples.size(); ++i) {
    const auto& ex = report.examples[i];
    json record = {{"type", "example"},      {"index", i},
                   {"source", ex.source},     {"output", ex.output},
                   {"references", ex.references}, {"correct", ex.correct}};
    if (report.pipeline == "two-stage" && !report.from_pivot) {
      record["intermediate"] = ex.intermediate;
      record["empty_intermediate"] = ex.empty_intermediate;
    }
    out << record.dump() << '\n';
  }
}

std::string run_decode(const std::string& checkpoint, const std::string& input, std::optional<std::size_t> beam,
                       bool from_pivot) {
  auto pipeline = checkpoint_pipeline(checkpoint);
  RawParallelFile raw;
  raw.name = "<input>";
  raw.pairs.push_back(TextPair{input, "-", 1});
  if (pipeline == "correlational") {
    auto ck = load_bridge_checkpoint(checkpoint);
    const auto& m = ck.model;
    raw.mode = m.mode;
    auto kind = from_pivot ? ViewKind::Sequence : m.x_encoder.kind();
    auto corpus = index_corpus(raw, from_pivot ? m.z_vocab : m.x_vocab, m.y_vocab, kind);
    check_features(corpus, m.config.feature_dim, "input");
    const auto& ex = corpus.examples.front();
    auto width = beam.value_or(m.config.beam_width);
    auto hyp = from_pivot ? infer_pivot_to_target(m, ex.source, width, m.config.max_decode_len)
                          : infer_bridge(m, ex, width, m.config.max_decode_len);
    return join_tokens(m.y_vocab, hyp.tokens, m.mode);
  }
  auto ck = load_two_stage_checkpoint(checkpoint);
  const auto& m = ck.model;
  raw.mode = m.stage2.mode;
  const auto& entry = from_pivot ? m.stage2 : m.stage1;
  auto corpus = index_corpus(raw, entry.source_vocab, m.stage2.target_vocab, entry.encoder.kind());
  check_features(corpus, entry.config.feature_dim, "input");
  auto width = beam.value_or(m.stage2.config.beam_width);
  Hypothesis hyp;
  if (from_pivot) {
    NoGradScope<float> no_grad;
    hyp = decode(m.stage2.decoder, m.stage2.encoder.encode(corpus.examples.front()), width,
                 m.stage2.config.max_decode_len);
  } else {
    hyp = infer_two_stage(m, corpus.examples.front(), width, m.stage2.config.max_decode_len).output;
  }
  return join_tokens(m.stage2.target_vocab, hyp.tokens, raw.mode);
}

int run_gradcheck_command(std::uint64_t first_seed, std::size_t seeds, std::ostream& out) {
  const auto start = Clock::now();
  auto seed_list = gradcheck_seeds(first_seed, seeds);
  bool all_passed = true;
  std::size_t count = 0;
  for (const auto& check : gradcheck_suite()) {
    auto result = run_gradcheck(check, seed_list);
    all_passed = all_passed && result.passed;
    ++count;
    char line[160];
    std::snprintf(line, sizeof(line), "%-22s %-4s worst_rel_err=%.3e instances=%zu", result.name.c_str(),
                  result.passed ? "PASS" : "FAIL", result.worst_relative_error, result.instances);
    out << line;
    if (!result.failure.empty()) out << " error: " << result.failure;
    out << '\n';
  }
  out << "gradcheck: " << count << " cases, tolerance " << kGradcheckTolerance << ", "
      << (all_passed ? "all passed" : "FAILED") << " in " << seconds_since(start) << " s\n";
  return all_passed ? kExitOk : kExitFailure;
}

void run_synth(const SyntheticSpec& spec, const std::string& out_dir) {
  auto data = gen_synthetic_pivot(spec);
  fs::create_directories(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
  write_parallel_tsv(path("d1_train.tsv"), data.d1_train);
  write_parallel_tsv(path("d1_valid.tsv"), data.d1_valid);
  write_parallel_tsv(path("d2_train.tsv"), data.d2_train);
  write_parallel_tsv(path("d2_valid.tsv"), data.d2_valid);
  write_parallel_tsv(path("test.tsv"), data.test);

  // Pivot view of the test set for Z->Y comparisons; never read by training.
  std::vector<TextPair> pivot_test;
  for (const auto& p : data.test) {
    pivot_test.push_back(TextPair{spec.xz.invert(p.source, spec.alphabet_size), p.target, p.line});
  }
  write_parallel_tsv(path("test_pivot.tsv"), pivot_test);

  json meta = {{"alphabet_size", spec.alphabet_size},
               {"min_len", spec.min_len},
               {"max_len", spec.max_len},
               {"transform_xz", spec.xz.name()},
               {"transform_zy", spec.zy.name()},
               {"seed", spec.seed},
               {"files",
                {{"d1_train.tsv", {{"views", "X-Z"}, {"lines", data.d1_train.size()}}},
                 {"d1_valid.tsv", {{"views", "X-Z"}, {"lines", data.d1_valid.size()}}},
                 {"d2_train.tsv", {{"views", "Z-Y"}, {"lines", data.d2_train.size()}}},
                 {"d2_valid.tsv", {{"views", "Z-Y"}, {"lines", data.d2_valid.size()}}},
                 {"test.tsv", {{"views", "X-Y"}, {"lines", data.test.size()}}},
                 {"test_pivot.tsv", {{"views", "Z-Y"}, {"lines", pivot_test.size()}}}}},
               {"oracle", "y = " + spec.zy.name() + "(" + spec.xz.name() + "^-1(x))"}};
  std::ofstream(path("meta.json"), std::ios::binary) << meta.dump(2) << '\n';

  std::ofstream cfg(path("run.cfg"), std::ios::binary);
  cfg << "# synthetic pivot task; paths are relative to this file\n"
         "pipeline = correlational\n"
         "mode = char\n"
         "d1_train = d1_train.tsv\n"
         "d1_valid = d1_valid.tsv\n"
         "d2_train = d2_train.tsv\n"
         "d2_valid = d2_valid.tsv\n"
         "test = test.tsv\n"
         "seed = "
      << spec.seed << '\n';
}

PivotJoin run_join(const std::string& a, const std::string& b, const std::string& out, TokenMode mode) {
  auto fa = read_parallel_tsv(a, mode);
  auto fb = read_parallel_tsv(b, mode);
  auto joined = join_on_pivot(fa.pairs, fb.pairs);
  write_parallel_tsv(out, joined.pairs);
  return joined;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Pivot-based sequence generation: correlational and two-stage encoder-decoders"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("corrbridge ") + CORRBRIDGE_BUILD_ID);

  std::string config_path, out_dir, pipeline_name, checkpoint, input;
  std::vector<std::string> tests, labels;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> beam;
  bool from_pivot = false;

  auto* train = app.add_subcommand("train", "train a pipeline from a run config");
  train->add_option("--config", config_path, "run config file")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--seed", seed, "override the config seed");
  train->add_option("--beam", beam, "beam width stored for later decoding");
  train->add_option("--pipeline", pipeline_name, "two-stage or correlational")
      ->check(CLI::IsMember({"two-stage", "correlational"}));

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on test TSVs");
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval->add_option("--test", tests, "test TSV (repeatable)");
  eval->add_option("--label", labels, "SRC-TGT label per test file, for the accuracy grid");
  eval->add_option("--config", config_path, "run config; supplies the test path when --test is absent");
  eval->add_option("--out", out_dir, "directory for eval reports");
  eval->add_option("--beam", beam, "beam width (default: from the checkpoint)");
  eval->add_option("--seed", seed, "accepted for symmetry; decoding is deterministic");
  eval->add_option("--pipeline", pipeline_name, "expected pipeline of the checkpoint")
      ->check(CLI::IsMember({"two-stage", "correlational"}));
  eval->add_flag("--pivot", from_pivot, "evaluate Z->Y from the pivot side");

  auto* dec = app.add_subcommand("decode", "decode one input");
  dec->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  dec->add_option("input", input, "source text")->required();
  dec->add_option("--beam", beam, "beam width");
  dec->add_flag("--pivot", from_pivot, "input is a pivot-side string");

  std::size_t gradcheck_count = 20;
  std::uint64_t first_seed = 1;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference checks of every differentiable op");
  grad->add_option("--seed", first_seed, "first seed");
  grad->add_option("--instances", gradcheck_count, "random instances per case");

  SyntheticSpec spec;
  std::string xz = "rot3", zy = "reverse";
  auto* synth = app.add_subcommand("synth", "generate a synthetic pivot task");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--alphabet", spec.alphabet_size, "alphabet size");
  synth->add_option("--min-len", spec.min_len, "shortest pivot string");
  synth->add_option("--max-len", spec.max_len, "longest pivot string");
  synth->add_option("--xz", xz, "X = xz(Z): identity, reverse, rotN, dupK");
  synth->add_option("--zy", zy, "Y = zy(Z)");
  synth->add_option("--d1", spec.d1_size, "D1 training pairs");
  synth->add_option("--d2", spec.d2_size, "D2 training pairs");
  synth->add_option("--d1-valid", spec.d1_valid_size, "D1 validation pairs");
  synth->add_option("--d2-valid", spec.d2_valid_size, "D2 validation pairs");
  synth->add_option("--test-size", spec.test_size, "X-Y test pairs");

  std::string join_a, join_b, join_out, join_mode = "char";
  auto* join = app.add_subcommand("join-test", "join two pivot-keyed test files into a source-target test set");
  join->add_option("--a", join_a, "TSV of (pivot, a)")->required();
  join->add_option("--b", join_b, "TSV of (pivot, b)")->required();
  join->add_option("--out", join_out, "output TSV of (a, b)")->required();
  join->add_option("--mode", join_mode, "char or whitespace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      auto config = load_run_config(config_path);
      if (seed) config.train.seed = *seed;
      if (beam) config.model.beam_width = *beam;
      if (!pipeline_name.empty()) config.pipeline = parse_pipeline(pipeline_name);
      config.validate();
      auto outcome = run_train(config, out_dir, evaluation_threads(), std::cout);
      std::cout << "checkpoint: " << outcome.checkpoint << "\nmetrics: " << outcome.metrics
                << "\nbest epoch " << outcome.best_epoch << ", validation accuracy " << outcome.best_valid << '\n';
    } else if (*eval) {
      if (tests.empty()) {
        if (config_path.empty()) throw ConfigError("eval needs --test or a --config with a 'test' key");
        auto config = load_run_config(config_path);
        if (config.test.empty()) throw ConfigError("missing data path: config key 'test' is not set");
        tests.push_back(config.test);
      }
      if (!labels.empty() && labels.size() != tests.size()) {
        throw ConfigError("--label must be given once per --test");
      }
      if (!pipeline_name.empty() && checkpoint_pipeline(checkpoint) != pipeline_name) {
        throw ConfigError(checkpoint + " holds a " + checkpoint_pipeline(checkpoint) + " model, not " + pipeline_name);
      }
      const auto threads = evaluation_threads();
      std::vector<PairAccuracy> grid;
      for (std::size_t i = 0; i < tests.size(); ++i) {
        auto report = run_eval(checkpoint, tests[i], beam, from_pivot, threads);
        auto label = labels.empty() ? fs::path(tests[i]).stem().string() : labels[i];
        if (!out_dir.empty()) write_eval_report(report, (fs::path(out_dir) / ("eval_" + label + ".jsonl")).string());
        char line[256];
        std::snprintf(line, sizeof(line), "%s: accuracy %.4f (%zu examples, beam %zu)", label.c_str(),
                      report.accuracy, report.examples.size(), report.beam_width);
        std::cout << line << '\n';
        auto dash = label.find('-');
        grid.push_back(dash == std::string::npos
                           ? PairAccuracy{label, "accuracy", report.accuracy}
                           : PairAccuracy{label.substr(0, dash), label.substr(dash + 1), report.accuracy});
      }
      if (grid.size() > 1) std::cout << '\n' << format_accuracy_grid(grid);
    } else if (*dec) {
      std::cout << run_decode(checkpoint, input, beam, from_pivot) << '\n';
    } else if (*grad) {
      return run_gradcheck_command(first_seed, gradcheck_count, std::cout);
    } else if (*synth) {
      spec.xz = Transform::parse(xz);
      spec.zy = Transform::parse(zy);
      run_synth(spec, out_dir);
      std::cout << "wrote synthetic task to " << out_dir << '\n';
    } else if (*join) {
      auto joined = run_join(join_a, join_b, join_out, parse_token_mode(join_mode));
      std::cout << "joined " << joined.pairs.size() << " pairs; unmatched keys: " << joined.unmatched_a
                << " in A, " << joined.unmatched_b << " in B\n";
    }
  } catch (const TrainingError& e) {
    std::cerr << "training failed: " << e.what() << '\n';
    return kExitFailure;
  } catch (const NumericsError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataHygieneError& e) {
    std::cerr << "data hygiene violation: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace corrbridge
