#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrbridge/data/corpus.hpp"
#include "corrbridge/seqmodel/config.hpp"
#include "corrbridge/training/trainer.hpp"

namespace corrbridge {

enum class Pipeline { TwoStage, Correlational };

std::string to_string(Pipeline pipeline);
Pipeline parse_pipeline(std::string_view text);

/// Everything a run needs, read from a flat `key = value` file. Lines
/// starting with '#' are comments. Unknown keys are rejected.
struct RunConfig {
  Pipeline pipeline = Pipeline::Correlational;
  TokenMode mode = TokenMode::Char;
  ViewKind x_view = ViewKind::Sequence;

  std::string d1_train;
  std::string d1_valid;
  std::string d2_train;
  std::string d2_valid;
  std::string test;

  ModelConfig model;
  bool auto_decode_len = true;  // max_decode_len from the longest training source
  TrainConfig train;
  bool standardize_at_inference = false;

  std::vector<double> lambda_grid;
  std::vector<double> learning_rate_grid;

  /// Raises ConfigError naming the first missing data path.
  void require_training_data() const;
  void validate() const;
};

RunConfig parse_run_config(std::istream& in, const std::string& name, const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);

/// Key/value pairs describing the effective configuration, in a fixed order.
std::vector<std::pair<std::string, std::string>> run_config_entries(const RunConfig& config);

}  // namespace corrbridge
