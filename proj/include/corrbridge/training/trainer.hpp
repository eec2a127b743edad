#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "corrbridge/numerics/adam.hpp"
#include "corrbridge/numerics/init.hpp"
#include "corrbridge/pipelines/models.hpp"

namespace corrbridge {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double lambda = 0.5;
  bool allow_lambda_override = false;  // permits lambda outside [0.1, 1.0]
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 30;
  std::uint64_t seed = 1;
  double var_floor = kDefaultVarFloor;
  std::size_t patience = 5;  // epochs without validation improvement
  double clip_norm = 5.0;

  void validate() const;
};

/// Optimizer, RNG and early-stopping bookkeeping carried across epochs.
struct TrainerState {
  AdamState<float> adam;
  Rng rng;
  std::size_t epoch = 0;
  double best_score = -1.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_since_best = 0;

  static TrainerState start(const TrainConfig& config);
};

enum class BatchKind { Correlation, CrossEntropy };

struct ScheduleStep {
  BatchKind kind;
  std::size_t index;  // batch position within the current pass over its corpus
  std::size_t cycle;  // how many times that corpus has been restarted
  friend bool operator==(const ScheduleStep&, const ScheduleStep&) = default;
};

/// Strict D1/D2 alternation until both corpora are exhausted; the corpus with
/// fewer batches restarts (cycles) as needed.
std::vector<ScheduleStep> alternation_schedule(std::size_t d1_batches, std::size_t d2_batches);

struct EpochReport {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  std::size_t correlation_batches = 0;
  std::size_t cross_entropy_batches = 0;
  double mean_correlation_loss = 0.0;
  double mean_cross_entropy = 0.0;
  std::vector<BatchKind> schedule;
  // Sum of per-batch gradient norms, by component and batch kind.
  double x_grad_from_correlation = 0.0;
  double z_grad_from_correlation = 0.0;
  double y_grad_from_correlation = 0.0;
  double x_grad_from_cross_entropy = 0.0;
  double z_grad_from_cross_entropy = 0.0;
  double y_grad_from_cross_entropy = 0.0;
};

/// Encoder-side inputs of a bridge model, gathered once per training run.
struct BridgeInputs {
  std::vector<Example> x;  // D1 sources
  std::vector<Example> z;  // D1 pivots followed by D2 pivots
};

BridgeInputs bridge_inputs(std::span<const Example> d1, std::span<const Example> d2);

/// One epoch of alternating training: D1 batches minimise the correlation
/// loss (X and Z encoders), D2 batches minimise cross-entropy (Z encoder and
/// Y decoder). Statistics are refreshed at the end.
EpochReport joint_train_epoch(BridgeModel<float>& model, std::span<const Example> d1, std::span<const Example> d2,
                              const TrainConfig& config, TrainerState& state);

/// One teacher-forced cross-entropy epoch over a single parallel corpus.
EpochReport single_train_epoch(EncoderDecoder<float>& model, std::span<const Example> corpus,
                               const TrainConfig& config, TrainerState& state);

}  // namespace corrbridge
