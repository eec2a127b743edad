#include "corrbridge/pipelines/pipelines.hpp"

#include <cmath>

#include "corrbridge/numerics/tape.hpp"
#include "corrbridge/pipelines/parallel.hpp"

namespace corrbridge {

namespace {

ParallelCorpus index_with_own_vocabs(const RawParallelFile& train, ViewKind source_kind, const char* what) {
  if (train.pairs.empty()) throw DataError(std::string(what) + " training file '" + train.name + "' is empty");
  Vocab source, target;
  if (source_kind == ViewKind::Sequence) extend_vocab(source, train, true);
  extend_vocab(target, train, false);
  return index_corpus(train, source, target, source_kind);
}

void require_validation(std::span<const Example> valid, const std::string& stage) {
  if (valid.empty()) throw DataError(stage + ": a validation split is required for model selection");
}

void log_epoch(std::vector<EpochLog>& history, const RunOptions& options, EpochLog entry) {
  history.push_back(entry);
  if (options.observer) options.observer(history.back());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TwoStageCorpora build_two_stage_corpora(const PivotFiles& files) {
  TwoStageCorpora out;
  out.d1_train = index_with_own_vocabs(files.d1_train, files.x_kind, "D1");
  out.d1_valid = index_corpus(files.d1_valid, out.d1_train.source_vocab, out.d1_train.target_vocab, files.x_kind);
  out.d2_train = index_with_own_vocabs(files.d2_train, ViewKind::Sequence, "D2");
  out.d2_valid = index_corpus(files.d2_valid, out.d2_train.source_vocab, out.d2_train.target_vocab);
  out.d1_train.views = out.d1_valid.views = ViewTags{'X', 'Z'};
  out.d2_train.views = out.d2_valid.views = ViewTags{'Z', 'Y'};
  return out;
}

BridgeCorpora build_bridge_corpora(const PivotFiles& files) {
  if (files.d1_train.pairs.empty()) throw DataError("D1 training file '" + files.d1_train.name + "' is empty");
  if (files.d2_train.pairs.empty()) throw DataError("D2 training file '" + files.d2_train.name + "' is empty");
  if (files.d1_train.mode != files.d2_train.mode) throw DataError("D1 and D2 use different tokenization modes");
  BridgeCorpora out;
  out.mode = files.d1_train.mode;
  out.x_kind = files.x_kind;
  if (files.x_kind == ViewKind::Sequence) extend_vocab(out.x_vocab, files.d1_train, true);
  extend_vocab(out.z_vocab, files.d1_train, false);
  extend_vocab(out.z_vocab, files.d2_train, true);
  extend_vocab(out.y_vocab, files.d2_train, false);

  auto d1 = index_corpus(files.d1_train, out.x_vocab, out.z_vocab, files.x_kind);
  out.feature_dim = d1.feature_dim;
  out.d1_train = std::move(d1.examples);
  out.d1_valid = index_corpus(files.d1_valid, out.x_vocab, out.z_vocab, files.x_kind).examples;
  out.d2_train = index_corpus(files.d2_train, out.z_vocab, out.y_vocab).examples;
  out.d2_valid = index_corpus(files.d2_valid, out.z_vocab, out.y_vocab).examples;
  return out;
}

double exact_match_rate(const std::vector<std::vector<int>>& hypotheses, std::span<const Example> references) {
  if (hypotheses.size() != references.size()) throw std::invalid_argument("exact_match_rate: size mismatch");
  if (references.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (hypotheses[i] == strip_markers(references[i].target)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(references.size());
}

namespace {

double stage_accuracy(const EncoderDecoder<float>& model, std::span<const Example> valid, std::size_t threads) {
  auto hyps = parallel_map<std::vector<int>>(valid.size(), threads, [&](std::size_t i) {
    NoGradScope<float> no_grad;
    auto rep = model.encoder.encode(valid[i]);
    return decode_greedy(model.decoder, rep, model.config.max_decode_len).tokens;
  });
  return exact_match_rate(hyps, valid);
}

}  // namespace

TrainedStage train_encoder_decoder(EncoderDecoder<float> model, std::span<const Example> train,
                                   std::span<const Example> valid, const TrainConfig& config,
                                   const std::string& stage, const RunOptions& options) {
  config.validate();
  require_validation(valid, stage);
  auto state = TrainerState::start(config);
  TrainedStage best{model.clone(), state, {}, -1.0};
  for (std::size_t e = 0; e < config.max_epochs; ++e) {
    auto report = single_train_epoch(model, train, config, state);
    EpochLog entry;
    entry.stage = stage;
    entry.epoch = report.epoch;
    entry.cross_entropy = report.mean_cross_entropy;
    entry.valid_accuracy = stage_accuracy(model, valid, options.threads);
    if (entry.valid_accuracy > state.best_score) {
      state.best_score = entry.valid_accuracy;
      state.best_epoch = report.epoch;
      state.epochs_since_best = 0;
      entry.improved = true;
      best.model = model.clone();
      best.state = state;
    } else {
      // A tie selects the later epoch but does not reset patience.
      ++state.epochs_since_best;
      if (entry.valid_accuracy == state.best_score) {
        state.best_epoch = report.epoch;
        best.model = model.clone();
        best.state = state;
      }
    }
    log_epoch(best.history, options, entry);
    if (state.epochs_since_best >= config.patience) break;
  }
  best.best_valid = state.best_score;
  return best;
}

TwoStageResult train_two_stage(const TwoStageCorpora& corpora, const ModelConfig& model_config,
                               const TrainConfig& config, const RunOptions& options) {
  auto run_stage = [&](const ParallelCorpus& train, const ParallelCorpus& valid, std::uint64_t stream,
                       const char* name) {
    auto stage_config = config;
    stage_config.seed = derive_seed(config.seed, stream);
    Rng init(derive_seed(config.seed, stream + 100));
    auto cfg = model_config;
    cfg.feature_dim = train.feature_dim;
    auto model = EncoderDecoder<float>::create(cfg, train.source_vocab, train.target_vocab, train.mode,
                                               train.source_kind, init);
    return train_encoder_decoder(std::move(model), train.examples, valid.examples, stage_config, name, options);
  };
  auto s1 = run_stage(corpora.d1_train, corpora.d1_valid, 1, "stage1");
  auto s2 = run_stage(corpora.d2_train, corpora.d2_valid, 2, "stage2");
  std::vector<EpochLog> history = s1.history;
  history.insert(history.end(), s2.history.begin(), s2.history.end());
  return TwoStageResult{TwoStageModel{std::move(s1.model), std::move(s2.model)}, std::move(s1.state),
                        std::move(s2.state), std::move(history)};
}

TwoStageOutput infer_two_stage(const TwoStageModel& model, const Example& x, std::size_t beam_width,
                               std::size_t max_len) {
  NoGradScope<float> no_grad;
  TwoStageOutput out;
  auto z_rep = model.stage1.encoder.encode(x);
  out.intermediate = decode(model.stage1.decoder, z_rep, beam_width, max_len).tokens;

  std::vector<int> z_ids;
  z_ids.reserve(out.intermediate.size());
  for (int id : out.intermediate) z_ids.push_back(model.stage2.source_vocab.id(model.stage1.target_vocab.token(id)));
  if (z_ids.empty()) {
    out.empty_intermediate = true;
    z_ids.push_back(kBos);
  }
  auto y_rep = model.stage2.encoder.sequence().encode(z_ids);
  out.output = decode(model.stage2.decoder, y_rep, beam_width, max_len);
  return out;
}

Hypothesis infer_bridge(const BridgeModel<float>& model, const Example& x, std::size_t beam_width,
                        std::size_t max_len) {
  NoGradScope<float> no_grad;
  auto rep = model.x_encoder.encode(x);
  if (model.standardize_at_inference) {
    auto mapped = standardize(as_single_row(rep, model.config.hidden_dim, "infer_bridge"), model.x_stats);
    std::vector<float> values(mapped.data().begin(), mapped.data().end());
    for (std::size_t d = 0; d < values.size(); ++d) {
      values[d] = model.z_stats.mean[d] + std::sqrt(model.z_stats.var[d]) * values[d];
    }
    rep = Tensor<float>::vector(std::move(values));
  }
  return decode(model.y_decoder, rep, beam_width, max_len);
}

Hypothesis infer_pivot_to_target(const BridgeModel<float>& model, std::span<const int> z, std::size_t beam_width,
                                 std::size_t max_len) {
  NoGradScope<float> no_grad;
  auto rep = model.z_encoder.encode(z);
  return decode(model.y_decoder, rep, beam_width, max_len);
}

double pivot_validation_accuracy(const BridgeModel<float>& model, std::span<const Example> valid,
                                 std::size_t beam_width, std::size_t threads) {
  auto hyps = parallel_map<std::vector<int>>(valid.size(), threads, [&](std::size_t i) {
    return infer_pivot_to_target(model, valid[i].source, beam_width, model.config.max_decode_len).tokens;
  });
  return exact_match_rate(hyps, valid);
}

double heldout_correlation(const BridgeModel<float>& model, std::span<const Example> slice) {
  if (slice.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto inputs = bridge_inputs(slice, {});
  const auto dim = model.config.hidden_dim;
  auto hx = encode_all(model.x_encoder, inputs.x);
  auto hz = encode_all(model.z_encoder, inputs.z);
  auto sx = compute_stats<float>(hx, dim, kDefaultVarFloor);
  auto sz = compute_stats<float>(hz, dim, kDefaultVarFloor);
  double total = 0.0;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      double a = (hx[i * dim + d] - sx.mean[d]) / std::sqrt(static_cast<double>(sx.var[d]));
      double b = (hz[i * dim + d] - sz.mean[d]) / std::sqrt(static_cast<double>(sz.var[d]));
      total += a * b;
    }
  }
  return total / static_cast<double>(slice.size() * dim);
}

BridgeResult train_correlational(const BridgeCorpora& corpora, const ModelConfig& model_config,
                                 const TrainConfig& config, const RunOptions& options) {
  config.validate();
  require_validation(corpora.d2_valid, "bridge");
  auto cfg = model_config;
  cfg.feature_dim = corpora.feature_dim;
  Rng init(derive_seed(config.seed, 0));
  auto model = BridgeModel<float>::create(cfg, corpora.x_vocab, corpora.z_vocab, corpora.y_vocab, corpora.mode,
                                          corpora.x_kind, init);
  auto state = TrainerState::start(config);

  EpochLog start;
  start.stage = "bridge";
  start.valid_accuracy = pivot_validation_accuracy(model, corpora.d2_valid, 1, options.threads);
  start.heldout_correlation = heldout_correlation(model, corpora.d1_valid);
  BridgeResult best{model.clone(), state, {}, -1.0};
  log_epoch(best.history, options, start);

  for (std::size_t e = 0; e < config.max_epochs; ++e) {
    auto report = joint_train_epoch(model, corpora.d1_train, corpora.d2_train, config, state);
    EpochLog entry;
    entry.stage = "bridge";
    entry.epoch = report.epoch;
    entry.correlation_loss = report.mean_correlation_loss;
    entry.cross_entropy = report.mean_cross_entropy;
    entry.valid_accuracy = pivot_validation_accuracy(model, corpora.d2_valid, 1, options.threads);
    entry.heldout_correlation = heldout_correlation(model, corpora.d1_valid);
    if (entry.valid_accuracy > state.best_score) {
      state.best_score = entry.valid_accuracy;
      state.best_epoch = report.epoch;
      state.epochs_since_best = 0;
      entry.improved = true;
      best.model = model.clone();
      best.state = state;
    } else {
      // A tie selects the later epoch but does not reset patience.
      ++state.epochs_since_best;
      if (entry.valid_accuracy == state.best_score) {
        state.best_epoch = report.epoch;
        best.model = model.clone();
        best.state = state;
      }
    }
    log_epoch(best.history, options, entry);
    if (state.epochs_since_best >= config.patience) break;
  }
  best.best_valid = state.best_score;
  return best;
}

GridReport grid_tune(const BridgeCorpora& corpora, std::span<const GridPoint> grid, const RunOptions& options) {
  if (grid.empty()) throw ConfigError("grid_tune: empty grid");
  if (corpora.d2_valid_views != ViewTags{'Z', 'Y'}) {
    throw DataHygieneError("bridge tuning must not use X–Y data (validation views are " +
                           corpora.d2_valid_views.str() + ", expected Z-Y)");
  }
  GridReport report;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto result = train_correlational(corpora, grid[i].model, grid[i].train, options);
    report.entries.push_back(GridEntry{grid[i], result.best_valid, result.state.best_epoch});
    if (report.entries[i].valid_accuracy > report.entries[report.best].valid_accuracy) report.best = i;
  }
  return report;
}

}  // namespace corrbridge
