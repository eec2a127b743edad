#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "corrbridge/cli/run_config.hpp"
#include "corrbridge/data/join.hpp"
#include "corrbridge/data/synthetic.hpp"

namespace corrbridge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numeric or training failure
inline constexpr int kExitUsage = 2;    // usage, config or input error

/// CORRBRIDGE_THREADS if set (must be a positive integer), otherwise the
/// hardware concurrency.
std::size_t evaluation_threads();

struct TrainOutcome {
  std::string checkpoint;
  std::string metrics;
  double best_valid = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs = 0;
};

/// Trains the configured pipeline and writes model.ckpt, metrics.jsonl and
/// train_report.json into out_dir. Progress lines go to `log`.
TrainOutcome run_train(const RunConfig& config, const std::string& out_dir, std::size_t threads, std::ostream& log);

struct EvalExample {
  std::string source;
  std::string output;
  std::vector<std::string> references;
  bool correct = false;
  std::string intermediate;  // two-stage only
  bool empty_intermediate = false;
};

struct EvalReport {
  std::string checkpoint;
  std::string test;
  std::string pipeline;
  bool from_pivot = false;
  std::size_t beam_width = 1;
  double accuracy = 0.0;
  std::vector<EvalExample> examples;
  std::string config_json;  // configuration stored in the checkpoint
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

/// Decodes every source line of `test` with the checkpoint. from_pivot
/// evaluates Z->Y instead: the pivot-to-target path of a bridge model, or
/// stage 2 alone of a two-stage model.
EvalReport run_eval(const std::string& checkpoint, const std::string& test, std::optional<std::size_t> beam,
                    bool from_pivot, std::size_t threads);

/// One JSON header record followed by one record per example.
void write_eval_report(const EvalReport& report, const std::string& path);

std::string run_decode(const std::string& checkpoint, const std::string& input, std::optional<std::size_t> beam,
                       bool from_pivot);

/// Returns the exit code; prints one line per case.
int run_gradcheck_command(std::uint64_t first_seed, std::size_t seeds, std::ostream& out);

/// Writes the synthetic splits, a Z-Y view of the test set, meta.json and a
/// ready-to-use run.cfg.
void run_synth(const SyntheticSpec& spec, const std::string& out_dir);

PivotJoin run_join(const std::string& a, const std::string& b, const std::string& out, TokenMode mode);

int run_cli(int argc, char** argv);

}  // namespace corrbridge
