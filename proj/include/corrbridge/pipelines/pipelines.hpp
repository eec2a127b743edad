#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrbridge/data/corpus.hpp"
#include "corrbridge/pipelines/models.hpp"
#include "corrbridge/seqmodel/search.hpp"
#include "corrbridge/training/trainer.hpp"

namespace corrbridge {

/// Raised when a tuning or inference path would read data it must not see.
class DataHygieneError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The four training-side files of a pivot task: D1 = X-Z and D2 = Z-Y, each
/// with a validation split.
struct PivotFiles {
  RawParallelFile d1_train;
  RawParallelFile d1_valid;
  RawParallelFile d2_train;
  RawParallelFile d2_valid;
  ViewKind x_kind = ViewKind::Sequence;
};

struct TwoStageCorpora {
  ParallelCorpus d1_train;  // X -> Z, vocabularies from D1 alone
  ParallelCorpus d1_valid;
  ParallelCorpus d2_train;  // Z -> Y, vocabularies from D2 alone
  ParallelCorpus d2_valid;
};

TwoStageCorpora build_two_stage_corpora(const PivotFiles& files);

/// Corpora indexed against shared vocabularies: X from D1 sources, Z from D1
/// targets then D2 sources, Y from D2 targets.
struct BridgeCorpora {
  Vocab x_vocab;
  Vocab z_vocab;
  Vocab y_vocab;
  TokenMode mode = TokenMode::Char;
  ViewKind x_kind = ViewKind::Sequence;
  std::size_t feature_dim = 0;
  std::vector<Example> d1_train;  // X-Z
  std::vector<Example> d1_valid;  // X-Z
  std::vector<Example> d2_train;  // Z-Y
  std::vector<Example> d2_valid;  // Z-Y
  ViewTags d2_valid_views{'Z', 'Y'};
};

BridgeCorpora build_bridge_corpora(const PivotFiles& files);

struct EpochLog {
  std::string stage;  // "stage1", "stage2" or "bridge"
  std::size_t epoch = 0;
  double correlation_loss = std::numeric_limits<double>::quiet_NaN();
  double cross_entropy = std::numeric_limits<double>::quiet_NaN();
  double valid_accuracy = 0.0;
  double heldout_correlation = std::numeric_limits<double>::quiet_NaN();
  bool improved = false;
};

using EpochObserver = std::function<void(const EpochLog&)>;

struct RunOptions {
  std::size_t threads = 1;
  EpochObserver observer;
};

/// Fraction of examples whose decoded ids equal the reference target.
double exact_match_rate(const std::vector<std::vector<int>>& hypotheses, std::span<const Example> references);

struct TrainedStage {
  EncoderDecoder<float> model;
  TrainerState state;  // as of the selected epoch
  std::vector<EpochLog> history;
  double best_valid = 0.0;
};

/// Cross-entropy epochs with early stopping on validation exact match.
TrainedStage train_encoder_decoder(EncoderDecoder<float> model, std::span<const Example> train,
                                   std::span<const Example> valid, const TrainConfig& config,
                                   const std::string& stage, const RunOptions& options = {});

struct TwoStageResult {
  TwoStageModel model;
  TrainerState stage1_state;
  TrainerState stage2_state;
  std::vector<EpochLog> history;
};

/// Trains X->Z and Z->Y independently; each stage draws its own seeds.
TwoStageResult train_two_stage(const TwoStageCorpora& corpora, const ModelConfig& model_config,
                               const TrainConfig& config, const RunOptions& options = {});

struct TwoStageOutput {
  Hypothesis output;
  std::vector<int> intermediate;  // stage1 ids
  bool empty_intermediate = false;
};

/// Decodes z' with stage1, re-indexes it through stage2's source vocabulary
/// (UNK for unknown tokens), then decodes y.
TwoStageOutput infer_two_stage(const TwoStageModel& model, const Example& x, std::size_t beam_width,
                               std::size_t max_len);

struct BridgeResult {
  BridgeModel<float> model;
  TrainerState state;  // as of the selected epoch
  std::vector<EpochLog> history;
  double best_valid = 0.0;
};

/// Joint epochs with early stopping on Z->Y validation accuracy. Epoch 0 in
/// the history is the untrained model.
BridgeResult train_correlational(const BridgeCorpora& corpora, const ModelConfig& model_config,
                                 const TrainConfig& config, const RunOptions& options = {});

/// X encoder then Y decoder; the Z encoder is not used.
Hypothesis infer_bridge(const BridgeModel<float>& model, const Example& x, std::size_t beam_width,
                        std::size_t max_len);

/// Z encoder then Y decoder.
Hypothesis infer_pivot_to_target(const BridgeModel<float>& model, std::span<const int> z, std::size_t beam_width,
                                 std::size_t max_len);

/// Z->Y exact match of the bridge model over a Z-Y corpus.
double pivot_validation_accuracy(const BridgeModel<float>& model, std::span<const Example> valid,
                                 std::size_t beam_width, std::size_t threads);

/// Mean over examples and dimensions of the product of standardized X and Z
/// representations, standardized with the statistics of `slice` itself.
double heldout_correlation(const BridgeModel<float>& model, std::span<const Example> slice);

struct GridPoint {
  ModelConfig model;
  TrainConfig train;
};

struct GridEntry {
  GridPoint point;
  double valid_accuracy = 0.0;
  std::size_t best_epoch = 0;
};

struct GridReport {
  std::vector<GridEntry> entries;
  std::size_t best = 0;
};

/// Trains every grid point and selects by Z->Y validation accuracy (first
/// wins ties). Refuses validation data that is not Z-Y.
GridReport grid_tune(const BridgeCorpora& corpora, std::span<const GridPoint> grid, const RunOptions& options = {});

/// Deterministic per-purpose seed derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace corrbridge
