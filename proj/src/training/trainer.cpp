#include "corrbridge/training/trainer.hpp"

#include <cmath>
#include <string>

#include "corrbridge/numerics/tape.hpp"
#include "corrbridge/training/objectives.hpp"

namespace corrbridge {

void TrainConfig::validate() const {
  if (!allow_lambda_override && (lambda < 0.1 || lambda > 1.0)) {
    throw ConfigError("lambda=" + std::to_string(lambda) + " outside [0.1, 1.0] (set allow_lambda_override)");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be non-negative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (!(var_floor > 0.0)) throw ConfigError("var_floor must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
}

TrainerState TrainerState::start(const TrainConfig& config) {
  config.validate();
  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  TrainerState state{AdamState<float>(adam), Rng(config.seed ^ 0x9e3779b97f4a7c15ULL)};
  return state;
}

std::vector<ScheduleStep> alternation_schedule(std::size_t d1_batches, std::size_t d2_batches) {
  if (d1_batches == 0 || d2_batches == 0) throw TrainingError("alternation needs batches from both corpora");
  const auto n = std::max(d1_batches, d2_batches);
  std::vector<ScheduleStep> out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({BatchKind::Correlation, i % d1_batches, i / d1_batches});
    out.push_back({BatchKind::CrossEntropy, i % d2_batches, i / d2_batches});
  }
  return out;
}

BridgeInputs bridge_inputs(std::span<const Example> d1, std::span<const Example> d2) {
  BridgeInputs in;
  in.x.assign(d1.begin(), d1.end());
  in.z.reserve(d1.size() + d2.size());
  for (const auto& e : d1) in.z.push_back(Example{strip_markers(e.target), {}, {}});
  for (const auto& e : d2) in.z.push_back(Example{e.source, {}, {}});
  return in;
}

namespace {

void zero_grads(const ParameterList<float>& params) {
  for (const auto& p : params) p.tensor.node()->grad.assign(p.tensor.size(), 0.0f);
}

ParameterList<float> join(ParameterList<float> a, const ParameterList<float>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

[[noreturn]] void rethrow_unstable(const InstabilityError& e, std::size_t epoch, std::size_t step, const char* kind) {
  throw TrainingError("epoch " + std::to_string(epoch + 1) + ", step " + std::to_string(step + 1) + " (" + kind +
                      " batch): " + e.what());
}

void check_finite(float loss, std::size_t epoch, std::size_t step, const char* kind) {
  if (!std::isfinite(loss)) {
    throw TrainingError("epoch " + std::to_string(epoch + 1) + ", step " + std::to_string(step + 1) + " (" + kind +
                        " batch): non-finite loss");
  }
}

}  // namespace

EpochReport joint_train_epoch(BridgeModel<float>& model, std::span<const Example> d1, std::span<const Example> d2,
                              const TrainConfig& config, TrainerState& state) {
  config.validate();
  if (d1.empty() || d2.empty()) throw TrainingError("joint training needs non-empty D1 and D2");

  auto d1_batches = make_batches(d1, config.batch_size, state.rng());
  auto d2_batches = make_batches(d2, config.batch_size, state.rng());
  const auto schedule = alternation_schedule(d1_batches.size(), d2_batches.size());

  const auto x_params = model.x_parameters();
  const auto z_params = model.z_parameters();
  const auto y_params = model.y_parameters();
  const auto all_params = model.parameters();
  const auto xz_params = join(x_params, z_params);
  const auto zy_params = join(z_params, y_params);

  EpochReport report;
  report.epoch = state.epoch + 1;
  std::size_t d1_cycle = 0;
  std::size_t d2_cycle = 0;
  double corr_total = 0.0;
  double ce_total = 0.0;

  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const auto& step = schedule[s];
    zero_grads(all_params);
    if (step.kind == BatchKind::Correlation) {
      if (step.cycle != d1_cycle) {
        d1_batches = make_batches(d1, config.batch_size, state.rng());
        d1_cycle = step.cycle;
      }
      const auto& batch = d1_batches[step.index];
      Tape<float> tape;
      Tensor<float> loss;
      try {
        TapeScope<float> scope(tape);
        auto hx = model.x_encoder.encode_batch(batch);
        auto hz = model.z_encoder.encode_batch(target_as_source(batch));
        loss = correlation_loss(hx, hz, model.x_stats, model.z_stats, config.lambda);
      } catch (const InstabilityError& e) {
        rethrow_unstable(e, state.epoch, s, "correlation");
      }
      check_finite(loss.item(), state.epoch, s, "correlation");
      tape.backward(loss);
      report.x_grad_from_correlation += grad_norm<float>(x_params);
      report.z_grad_from_correlation += grad_norm<float>(z_params);
      report.y_grad_from_correlation += grad_norm<float>(y_params);
      clip_grad_norm<float>(xz_params, config.clip_norm);
      state.adam.step(xz_params);
      corr_total += loss.item();
      ++report.correlation_batches;
    } else {
      if (step.cycle != d2_cycle) {
        d2_batches = make_batches(d2, config.batch_size, state.rng());
        d2_cycle = step.cycle;
      }
      const auto& batch = d2_batches[step.index];
      Tape<float> tape;
      Tensor<float> loss;
      try {
        TapeScope<float> scope(tape);
        auto hz = model.z_encoder.encode_batch(batch.source);
        loss = batch_cross_entropy(model.y_decoder, hz, batch.target);
      } catch (const InstabilityError& e) {
        rethrow_unstable(e, state.epoch, s, "cross-entropy");
      }
      check_finite(loss.item(), state.epoch, s, "cross-entropy");
      tape.backward(loss);
      report.x_grad_from_cross_entropy += grad_norm<float>(x_params);
      report.z_grad_from_cross_entropy += grad_norm<float>(z_params);
      report.y_grad_from_cross_entropy += grad_norm<float>(y_params);
      clip_grad_norm<float>(zy_params, config.clip_norm);
      state.adam.step(zy_params);
      ce_total += loss.item();
      ++report.cross_entropy_batches;
    }
    report.schedule.push_back(step.kind);
  }
  zero_grads(all_params);

  report.steps = schedule.size();
  report.mean_correlation_loss = corr_total / static_cast<double>(report.correlation_batches);
  report.mean_cross_entropy = ce_total / static_cast<double>(report.cross_entropy_batches);

  const auto inputs = bridge_inputs(d1, d2);
  model.x_stats = update_epoch_stats(model.x_encoder, inputs.x, config.var_floor);
  model.z_stats = update_epoch_stats(model.z_encoder, inputs.z, config.var_floor);
  ++state.epoch;
  return report;
}

EpochReport single_train_epoch(EncoderDecoder<float>& model, std::span<const Example> corpus,
                               const TrainConfig& config, TrainerState& state) {
  config.validate();
  if (corpus.empty()) throw TrainingError("training corpus is empty");
  const auto batches = make_batches(corpus, config.batch_size, state.rng());
  const auto params = model.parameters();

  EpochReport report;
  report.epoch = state.epoch + 1;
  double total = 0.0;
  for (std::size_t s = 0; s < batches.size(); ++s) {
    zero_grads(params);
    Tape<float> tape;
    Tensor<float> loss;
    try {
      TapeScope<float> scope(tape);
      auto reps = model.encoder.encode_batch(batches[s]);
      loss = batch_cross_entropy(model.decoder, reps, batches[s].target);
    } catch (const InstabilityError& e) {
      rethrow_unstable(e, state.epoch, s, "cross-entropy");
    }
    check_finite(loss.item(), state.epoch, s, "cross-entropy");
    tape.backward(loss);
    clip_grad_norm<float>(params, config.clip_norm);
    state.adam.step(params);
    total += loss.item();
    report.schedule.push_back(BatchKind::CrossEntropy);
  }
  zero_grads(params);
  report.steps = batches.size();
  report.cross_entropy_batches = batches.size();
  report.mean_cross_entropy = total / static_cast<double>(batches.size());
  ++state.epoch;
  return report;
}

}  // namespace corrbridge
