// Acceptance suite: one PASS/FAIL/SKIP line per criterion on stdout,
// progress and diagnostics on stderr. Exit status is 0 only if nothing failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corrbridge/cli/commands.hpp"
#include "corrbridge/cli/metrics.hpp"
#include "corrbridge/cli/gradcheck_suite.hpp"
#include "corrbridge/numerics/adam.hpp"
#include "corrbridge/numerics/tape.hpp"
#include "corrbridge/pipelines/pipelines.hpp"
#include "corrbridge/training/checkpoint.hpp"
#include "corrbridge/training/standardize.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace corrbridge;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  enum class Status { Pass, Fail, Skip } status = Status::Fail;
  std::string detail;
};

Verdict pass(std::string d) { return {Verdict::Status::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Verdict::Status::Fail, std::move(d)}; }
Verdict skip(std::string d) { return {Verdict::Status::Skip, std::move(d)}; }
Verdict judge(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

std::string fmt(const char* format, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Settings of the synthetic bridge experiment. hidden_dim and beam_width are
// fixed by the criterion; the learning rate was chosen on Z-Y validation
// accuracy and the epoch counts fit the time budget.
struct BridgeProtocol {
  std::size_t hidden_dim = 128;
  std::size_t beam_width = 4;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  double lambda = 1.0;
  double var_floor = 0.1;
  std::size_t two_stage_epochs = 180;
  std::size_t bridge_epochs = 250;
  std::size_t patience = 1000;
  bool standardize_at_inference = false;
  double budget_seconds = 15 * 60;
  double two_stage_target = 0.95;
  double bridge_target = 0.90;
  double pivot_gap_points = 5.0;
};

// ---------------------------------------------------------------------------

Verdict gradient_fidelity() {
  const auto start = Clock::now();
  auto suite = gradcheck_suite();
  auto seeds = gradcheck_seeds(1, 20);
  double worst = 0.0;
  std::string worst_name;
  std::vector<std::string> failed;
  std::set<std::string> names;
  for (const auto& c : suite) {
    auto r = run_gradcheck(c, seeds);
    names.insert(c.name);
    std::cerr << fmt("  %-22s %s worst=%.3e\n", c.name.c_str(), r.passed ? "ok  " : "FAIL", r.worst_relative_error);
    if (!r.passed) failed.push_back(c.name + (r.failure.empty() ? "" : " (" + r.failure + ")"));
    if (r.worst_relative_error > worst) {
      worst = r.worst_relative_error;
      worst_name = c.name;
    }
  }
  const double secs = seconds_since(start);
  const std::set<std::string> composite{"gru_step",          "standardize",         "correlation_loss",
                                        "sequence_nll",      "batch_cross_entropy", "vector_encoder"};
  const bool composites = names.count("correlation_loss") && names.count("sequence_nll");
  std::size_t op_families = 0;
  for (const auto& n : names) op_families += composite.count(n) == 0;
  std::string detail = fmt("%zu cases (%zu op families + composites), 20 seeds, worst rel err %.2e (%s), %.1f s",
                           suite.size(), op_families, worst, worst_name.c_str(), secs);
  for (const auto& f : failed) detail += "; failed: " + f;
  return judge(failed.empty() && composites && op_families >= 12 && worst <= 1e-4 && secs <= 60.0, detail);
}

Verdict standardization_contract() {
  const auto start = Clock::now();
  SyntheticSpec spec;
  spec.d1_size = 1000;
  spec.d2_size = 10;
  spec.test_size = 10;
  auto data = gen_synthetic_pivot(spec);
  RawParallelFile raw{"d1", TokenMode::Char, data.d1_train};
  Vocab src;
  extend_vocab(src, raw, true);
  auto corpus = index_corpus(raw, src, src);
  Rng rng(17);
  SequenceEncoder<double> encoder(src.size(), 64, 64, rng);

  auto stats = update_epoch_stats(encoder, corpus.examples, kDefaultVarFloor);
  auto reps = encode_all(encoder, corpus.examples);
  const std::size_t n = corpus.examples.size();
  auto s = standardize(Tensor<double>::matrix(n, 64, reps), stats);
  double worst_mean = 0.0, worst_var = 0.0;
  for (std::size_t d = 0; d < 64; ++d) {
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += s.at(i, d);
    m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v += (s.at(i, d) - m) * (s.at(i, d) - m);
    v /= static_cast<double>(n);
    worst_mean = std::max(worst_mean, std::abs(m));
    worst_var = std::max(worst_var, std::abs(v - 1.0));
  }
  const double secs = seconds_since(start);
  return judge(worst_mean <= 1e-6 && worst_var <= 1e-6 && secs <= 10.0,
               fmt("%zu instances, hidden 64: max |mean| %.1e, max |var-1| %.1e, %.2f s", n, worst_mean, worst_var,
                   secs));
}

Verdict correlation_sanity() {
  const auto start = Clock::now();
  Rng rng(5);
  auto hx = Tensor<double>::zeros({64, 16}, true);
  auto hz = Tensor<double>::zeros({64, 16}, true);
  uniform_fill(hx, rng);
  uniform_fill(hz, rng);
  AdamState<double> adam(AdamConfig{0.01});
  ParameterList<double> params{{"hx", hx}, {"hz", hz}};
  auto exact = [&] {
    auto sx = compute_stats<double>(hx.data(), 16, kDefaultVarFloor);
    auto sz = compute_stats<double>(hz.data(), 16, kDefaultVarFloor);
    return std::pair{sx, sz};
  };
  double corr = 0.0;
  std::size_t steps = 0;
  for (; steps < 500; ++steps) {
    auto [sx, sz] = exact();
    hx.zero_grad();
    hz.zero_grad();
    Tape<double> tape;
    Tensor<double> loss;
    {
      TapeScope<double> scope(tape);
      loss = correlation_loss(hx, hz, sx, sz, 1.0);
    }
    tape.backward(loss);
    adam.step(params);
  }
  auto [sx, sz] = exact();
  corr = normalized_correlation(hx, hz, sx, sz).item();
  const double secs = seconds_since(start);
  return judge(corr >= 0.99 && secs <= 10.0,
               fmt("normalized corr %.4f after %zu Adam steps (lambda 1, lr 0.01), %.2f s", corr, steps, secs));
}

// ---------------------------------------------------------------------------

std::string random_word(Rng& rng) {
  std::string w;
  const std::size_t len = 3 + rng() % 6;
  for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng() % 20));
  return w;
}

std::vector<TextPair> random_pairs(Rng& rng, std::size_t n) {
  std::vector<TextPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({random_word(rng), random_word(rng), i + 1});
  return out;
}

template <typename Decode>
double train_match(std::span<const Example> corpus, Decode&& decode_one) {
  NoGradScope<float> off;
  std::size_t ok = 0;
  for (const auto& ex : corpus) ok += decode_one(ex) == strip_markers(ex.target);
  return static_cast<double>(ok) / static_cast<double>(corpus.size());
}

Verdict memorization() {
  const auto start = Clock::now();
  Rng data_rng(23);
  ModelConfig cfg;
  cfg.embed_dim = cfg.hidden_dim = 64;
  cfg.max_decode_len = 16;
  TrainConfig train;
  train.batch_size = 8;
  train.learning_rate = 0.01;
  const std::size_t max_epochs = 500;
  std::vector<std::string> parts;
  bool ok = true;

  auto run_stage = [&](const std::string& name, std::uint64_t seed) {
    RawParallelFile raw{name, TokenMode::Char, random_pairs(data_rng, 32)};
    Vocab sv, tv;
    extend_vocab(sv, raw, true);
    extend_vocab(tv, raw, false);
    auto corpus = index_corpus(raw, sv, tv);
    Rng init(seed);
    auto model = EncoderDecoder<float>::create(cfg, sv, tv, TokenMode::Char, ViewKind::Sequence, init);
    auto state = TrainerState::start(train);
    double acc = 0.0;
    std::size_t epoch = 0;
    while (epoch < max_epochs && acc < 1.0) {
      single_train_epoch(model, corpus.examples, train, state);
      ++epoch;
      acc = train_match(corpus.examples, [&](const Example& ex) {
        return decode(model.decoder, model.encoder.encode(ex), 1, cfg.max_decode_len).tokens;
      });
    }
    ok = ok && acc == 1.0;
    parts.push_back(fmt("%s %.0f%% @%zu", name.c_str(), 100.0 * acc, epoch));
  };
  run_stage("stage1", 1);
  run_stage("stage2", 2);

  {
    PivotFiles files;
    files.d1_train = RawParallelFile{"d1", TokenMode::Char, random_pairs(data_rng, 32)};
    files.d2_train = RawParallelFile{"d2", TokenMode::Char, random_pairs(data_rng, 32)};
    files.d1_valid = files.d1_train;
    files.d2_valid = files.d2_train;
    auto corpora = build_bridge_corpora(files);
    Rng init(3);
    auto model = BridgeModel<float>::create(cfg, corpora.x_vocab, corpora.z_vocab, corpora.y_vocab, TokenMode::Char,
                                            ViewKind::Sequence, init);
    auto bridge_train = train;
    bridge_train.var_floor = 0.1;
    auto state = TrainerState::start(bridge_train);
    double acc = 0.0;
    std::size_t epoch = 0;
    while (epoch < max_epochs && acc < 1.0) {
      joint_train_epoch(model, corpora.d1_train, corpora.d2_train, bridge_train, state);
      ++epoch;
      acc = train_match(corpora.d2_train, [&](const Example& ex) {
        return infer_pivot_to_target(model, ex.source, 1, cfg.max_decode_len).tokens;
      });
    }
    ok = ok && acc == 1.0;
    parts.push_back(fmt("bridge Z->Y %.0f%% @%zu", 100.0 * acc, epoch));
  }

  const double secs = seconds_since(start);
  std::string detail = "32 random pairs, hidden 64:";
  for (const auto& p : parts) detail += " " + p + ";";
  detail += fmt(" %.1f s", secs);
  return judge(ok && secs <= 120.0, detail);
}

// ---------------------------------------------------------------------------

struct RunResult {
  TrainOutcome outcome;
  double train_seconds = 0.0;
  std::vector<nlohmann::json> epochs;
};

RunResult train_run(const RunConfig& config, const fs::path& out, std::size_t threads) {
  std::ofstream log(out.string() + ".log");
  RunResult r;
  const auto start = Clock::now();
  r.outcome = run_train(config, out.string(), threads, log);
  r.train_seconds = seconds_since(start);
  std::ifstream metrics(r.outcome.metrics);
  for (std::string line; std::getline(metrics, line);) {
    auto j = nlohmann::json::parse(line);
    if (j.at("type") == "epoch") r.epochs.push_back(j);
  }
  return r;
}

Verdict synthetic_bridge(const fs::path& work, const BridgeProtocol& p) {
  const auto threads = evaluation_threads();
  const fs::path dir = work / "synthetic";
  SyntheticSpec spec;  // alphabet 20, lengths 4-8, rot3 / reverse, 3000 / 3000, test 500
  run_synth(spec, dir.string());

  RunConfig base = load_run_config((dir / "run.cfg").string());
  base.model.embed_dim = base.model.hidden_dim = p.hidden_dim;
  base.model.beam_width = p.beam_width;
  base.train.batch_size = p.batch_size;
  base.train.learning_rate = p.learning_rate;
  base.train.lambda = p.lambda;
  base.train.var_floor = p.var_floor;
  base.train.patience = p.patience;
  base.standardize_at_inference = p.standardize_at_inference;

  auto two_cfg = base;
  two_cfg.pipeline = Pipeline::TwoStage;
  two_cfg.train.max_epochs = p.two_stage_epochs;
  std::cerr << "  training two-stage (" << p.two_stage_epochs << " epochs per stage)\n";
  auto two = train_run(two_cfg, work / "two_stage", threads);
  const auto two_ckpt = two.outcome.checkpoint;
  auto two_eval = run_eval(two_ckpt, (dir / "test.tsv").string(), p.beam_width, false, threads);
  auto stage2_eval = run_eval(two_ckpt, (dir / "test_pivot.tsv").string(), p.beam_width, true, threads);
  write_eval_report(two_eval, (work / "two_stage" / "eval_test.jsonl").string());
  std::cerr << fmt("  two-stage: %.1f%% (stage 2 alone %.1f%%), trained in %.0f s\n", 100 * two_eval.accuracy,
                   100 * stage2_eval.accuracy, two.train_seconds);

  auto bridge_cfg = base;
  bridge_cfg.pipeline = Pipeline::Correlational;
  bridge_cfg.train.max_epochs = p.bridge_epochs;
  std::cerr << "  training correlational (" << p.bridge_epochs << " epochs)\n";
  auto bridge = train_run(bridge_cfg, work / "bridge", threads);
  const auto bridge_ckpt = bridge.outcome.checkpoint;
  auto bridge_eval = run_eval(bridge_ckpt, (dir / "test.tsv").string(), p.beam_width, false, threads);
  auto pivot_eval = run_eval(bridge_ckpt, (dir / "test_pivot.tsv").string(), p.beam_width, true, threads);
  write_eval_report(bridge_eval, (work / "bridge" / "eval_test.jsonl").string());

  // Diagnostic only: the same bridge with the other inference mapping.
  auto flipped = load_bridge_checkpoint(bridge_ckpt);
  flipped.model.standardize_at_inference = !p.standardize_at_inference;
  const auto flipped_ckpt = (work / "bridge" / "model_flipped.ckpt").string();
  save_checkpoint(flipped_ckpt, flipped.model, flipped.train, flipped.state);
  const double flipped_accuracy = run_eval(flipped_ckpt, (dir / "test.tsv").string(), p.beam_width, false, threads).accuracy;
  std::cerr << fmt("  bridge: %.1f%% (Z->Y %.1f%%; %s mapping %.1f%%), trained in %.0f s\n",
                   100 * bridge_eval.accuracy, 100 * pivot_eval.accuracy,
                   p.standardize_at_inference ? "raw" : "standardized", 100 * flipped_accuracy, bridge.train_seconds);

  double corr0 = std::nan(""), corr_best = std::nan("");
  for (const auto& e : bridge.epochs) {
    const auto epoch = e.at("epoch").get<std::size_t>();
    if (e.at("stage") != "bridge" || e.at("heldout_correlation").is_null()) continue;
    if (epoch == 0) corr0 = e.at("heldout_correlation").get<double>();
    if (epoch == bridge.outcome.best_epoch) corr_best = e.at("heldout_correlation").get<double>();
  }

  const bool two_ok = two_eval.accuracy >= p.two_stage_target;
  const bool bridge_ok = bridge_eval.accuracy >= p.bridge_target;
  const bool gap_ok = 100.0 * pivot_eval.accuracy >= 100.0 * stage2_eval.accuracy - p.pivot_gap_points;
  const bool time_ok = two.train_seconds <= p.budget_seconds && bridge.train_seconds <= p.budget_seconds;
  const bool corr_ok = corr_best > corr0;
  std::string detail = fmt(
      "two-stage %.1f%% (>= %.0f%%: %s); bridge %.1f%% (>= %.0f%%: %s) [%s mapping, not judged: %.1f%%]; bridge Z->Y %.1f%% vs stage-2 %.1f%% "
      "(gap <= %.0f: %s); held-out corr %.3f -> %.3f at best epoch %zu; train time %.0f s / %.0f s (<= %.0f s: %s)",
      100 * two_eval.accuracy, 100 * p.two_stage_target, two_ok ? "yes" : "NO", 100 * bridge_eval.accuracy,
      100 * p.bridge_target, bridge_ok ? "yes" : "NO", p.standardize_at_inference ? "raw" : "standardized",
      100 * flipped_accuracy, 100 * pivot_eval.accuracy, 100 * stage2_eval.accuracy,
      p.pivot_gap_points, gap_ok ? "yes" : "NO", corr0, corr_best, bridge.outcome.best_epoch, two.train_seconds,
      bridge.train_seconds, p.budget_seconds, time_ok ? "yes" : "NO");
  return judge(two_ok && bridge_ok && gap_ok && time_ok && corr_ok, detail);
}

// ---------------------------------------------------------------------------

Verdict bridge_hygiene() {
  SyntheticSpec spec;
  spec.d1_size = spec.d2_size = 200;
  spec.d1_valid_size = spec.d2_valid_size = 20;
  spec.test_size = 50;
  auto data = gen_synthetic_pivot(spec);
  PivotFiles files;
  files.d1_train = RawParallelFile{"d1_train", TokenMode::Char, data.d1_train};
  files.d1_valid = RawParallelFile{"d1_valid", TokenMode::Char, data.d1_valid};
  files.d2_train = RawParallelFile{"d2_train", TokenMode::Char, data.d2_train};
  files.d2_valid = RawParallelFile{"d2_valid", TokenMode::Char, data.d2_valid};
  auto corpora = build_bridge_corpora(files);

  ModelConfig cfg;
  cfg.embed_dim = cfg.hidden_dim = 32;
  TrainConfig train;
  train.max_epochs = 2;
  train.var_floor = 0.1;
  auto result = train_correlational(corpora, cfg, train);
  auto& model = result.model;

  RawParallelFile test_raw{"test", TokenMode::Char, data.test};
  auto test = index_corpus(test_raw, corpora.x_vocab, corpora.y_vocab);
  std::size_t z_calls = 0, x_calls = 0;
  for (bool mapped : {false, true}) {
    model.standardize_at_inference = mapped;
    model.z_encoder.calls.reset();
    model.x_encoder.calls().reset();
    for (const auto& ex : test.examples) {
      (void)infer_bridge(model, ex, 1, cfg.max_decode_len);
      (void)infer_bridge(model, ex, 4, cfg.max_decode_len);
    }
    z_calls += model.z_encoder.calls.count();
    x_calls += model.x_encoder.calls().count();
  }

  bool guard_fired = false;
  std::string guard_message;
  auto poisoned = corpora;
  poisoned.d2_valid_views = ViewTags{'X', 'Y'};
  std::vector<GridPoint> grid{{cfg, train}};
  try {
    (void)grid_tune(poisoned, grid);
  } catch (const DataHygieneError& e) {
    guard_fired = true;
    guard_message = e.what();
  }
  auto clean = grid_tune(corpora, grid);

  const bool ok = z_calls == 0 && x_calls > 0 && guard_fired && clean.entries.size() == 1;
  return judge(ok, fmt("infer_bridge over %zu inputs x 4 modes: %zu Z-encoder calls, %zu X-encoder calls; "
                       "X-Y validation guard %s (\"%s\"); Z-Y grid run ok",
                       test.examples.size(), z_calls, x_calls, guard_fired ? "fired" : "DID NOT FIRE",
                       guard_message.c_str()));
}

Verdict determinism(const fs::path& work) {
  const fs::path dir = work / "determinism";
  SyntheticSpec spec;
  spec.d1_size = spec.d2_size = 300;
  spec.d1_valid_size = spec.d2_valid_size = 30;
  spec.test_size = 30;
  run_synth(spec, dir.string());
  std::vector<std::string> mismatches;
  for (auto pipeline : {Pipeline::Correlational, Pipeline::TwoStage}) {
    auto cfg = load_run_config((dir / "run.cfg").string());
    cfg.pipeline = pipeline;
    cfg.model.embed_dim = cfg.model.hidden_dim = 32;
    cfg.train.max_epochs = 3;
    cfg.train.var_floor = 0.1;
    const auto name = to_string(pipeline);
    auto a = train_run(cfg, dir / (name + "_a"), 1);
    auto b = train_run(cfg, dir / (name + "_b"), 3);
    if (slurp(a.outcome.metrics) != slurp(b.outcome.metrics)) mismatches.push_back(name + " metrics");
    if (slurp(a.outcome.checkpoint) != slurp(b.outcome.checkpoint)) mismatches.push_back(name + " checkpoint");
  }
  std::string detail = "two runs per pipeline (1 vs 3 evaluation threads): ";
  detail += mismatches.empty() ? "metrics.jsonl and model.ckpt byte-identical" : "differences in";
  for (const auto& m : mismatches) detail += " " + m;
  return judge(mismatches.empty(), detail);
}

// Optional: needs the NEWS 2012 En-Hi files, which cannot be redistributed.
Verdict real_data() {
  const char* root = std::getenv("CORRBRIDGE_NEWS_DIR");
  if (!root) return skip("set CORRBRIDGE_NEWS_DIR to a directory with enhi_{train,valid,test}.tsv to run");
  const fs::path dir(root);
  struct {
    ModelConfig model;
    TrainConfig train;
  } cfg;
  cfg.model.embed_dim = cfg.model.hidden_dim = 1024;
  cfg.model.max_decode_len = 40;
  cfg.train.batch_size = 32;
  cfg.train.learning_rate = 0.001;
  cfg.train.max_epochs = 50;
  auto train = read_parallel_tsv((dir / "enhi_train.tsv").string(), TokenMode::Char);
  auto valid = read_parallel_tsv((dir / "enhi_valid.tsv").string(), TokenMode::Char);
  auto test = read_parallel_tsv((dir / "enhi_test.tsv").string(), TokenMode::Char);
  Vocab sv, tv;
  extend_vocab(sv, train, true);
  extend_vocab(tv, train, false);
  auto tr = index_corpus(train, sv, tv), va = index_corpus(valid, sv, tv);
  Rng init(derive_seed(cfg.train.seed, 101));
  auto model = EncoderDecoder<float>::create(cfg.model, sv, tv, TokenMode::Char, ViewKind::Sequence, init);
  auto trained = train_encoder_decoder(std::move(model), tr.examples, va.examples, cfg.train, "en-hi");
  std::vector<std::string> hyps;
  {
    NoGradScope<float> off;
    for (const auto& p : test.pairs) {
      auto ids = sv.encode(tokenize(p.source, TokenMode::Char));
      Example ex;
      ex.source = ids;
      auto h = decode(trained.model.decoder, trained.model.encoder.encode(ex), 1, cfg.model.max_decode_len);
      hyps.push_back(detokenize(tv.decode(h.tokens), TokenMode::Char));
    }
  }
  const double acc = compute_accuracy(hyps, group_references(test.pairs));
  return judge(std::abs(100.0 * acc - 61.6) <= 10.0, fmt("En-Hi single-stage accuracy %.1f%% (reference 61.6%%)", 100 * acc));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corrbridge acceptance suite"};
  std::string work_dir = (fs::temp_directory_path() / "corrbridge_acceptance").string();
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "scratch directory for generated data and runs");
  app.add_option("--only", only, "run only these criteria (repeatable)");
  CLI11_PARSE(app, argc, argv);

  const fs::path work(work_dir);
  fs::remove_all(work);
  fs::create_directories(work);
  BridgeProtocol protocol;

  struct Criterion {
    int id;
    const char* title;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient fidelity", gradient_fidelity},
      {2, "standardization contract", standardization_contract},
      {3, "correlation sanity", correlation_sanity},
      {4, "memorization", memorization},
      {5, "synthetic bridge experiment", [&] { return synthetic_bridge(work, protocol); }},
      {6, "bridge-data hygiene", bridge_hygiene},
      {7, "determinism", [&] { return determinism(work); }},
      {8, "real-data protocol (optional)", real_data},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::cerr << "[" << c.id << "] " << c.title << " ...\n";
    const auto start = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = fail(std::string("threw: ") + e.what());
    }
    const char* tag = v.status == Verdict::Status::Pass ? "PASS" : v.status == Verdict::Status::Fail ? "FAIL" : "SKIP";
    if (v.status == Verdict::Status::Fail) ++failures;
    std::cout << tag << " [" << c.id << "] " << c.title << ": " << v.detail
              << fmt(" [%.1f s]", seconds_since(start)) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
