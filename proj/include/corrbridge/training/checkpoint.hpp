#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "corrbridge/pipelines/models.hpp"
#include "corrbridge/training/trainer.hpp"

namespace corrbridge {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

/// Container layout: "CBRG", u32 version, u64 metadata length, UTF-8 JSON
/// metadata, u64 record count, then records of u64 name length, name, u64
/// rank, rank x u64 extents, float32 data. All integers little-endian.
struct CheckpointFile {
  std::string metadata;
  std::vector<TensorRecord> tensors;
};

std::string encode_checkpoint(const CheckpointFile& file);
CheckpointFile decode_checkpoint(std::string_view bytes, const std::string& name = "<memory>");
void write_checkpoint_file(const std::string& path, const CheckpointFile& file);
CheckpointFile read_checkpoint_file(const std::string& path);

struct BridgeCheckpoint {
  BridgeModel<float> model;
  TrainConfig train;
  TrainerState state;
};

struct TwoStageCheckpoint {
  TwoStageModel model;
  TrainConfig train;
  TrainerState stage1_state;
  TrainerState stage2_state;
};

void save_checkpoint(const std::string& path, const BridgeModel<float>& model, const TrainConfig& train,
                     const TrainerState& state);
void save_checkpoint(const std::string& path, const TwoStageModel& model, const TrainConfig& train,
                     const TrainerState& stage1_state, const TrainerState& stage2_state);

BridgeCheckpoint load_bridge_checkpoint(const std::string& path);
TwoStageCheckpoint load_two_stage_checkpoint(const std::string& path);

/// "correlational" or "two-stage".
std::string checkpoint_pipeline(const std::string& path);

}  // namespace corrbridge
