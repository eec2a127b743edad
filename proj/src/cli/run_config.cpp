#include "corrbridge/cli/run_config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace corrbridge {

std::string to_string(Pipeline pipeline) {
  return pipeline == Pipeline::TwoStage ? "two-stage" : "correlational";
}

Pipeline parse_pipeline(std::string_view text) {
  if (text == "two-stage") return Pipeline::TwoStage;
  if (text == "correlational") return Pipeline::Correlational;
  throw ConfigError("unknown pipeline '" + std::string(text) + "' (expected two-stage or correlational)");
}

namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
  N out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  if (!value.empty() && value.front() == '-') throw ConfigError("config key '" + key + "' must be non-negative");
  return parse_number<std::size_t>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "' is an empty list");
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"pipeline", [](RunConfig& c, auto&, auto& v) { c.pipeline = parse_pipeline(v); }},
      {"mode", [](RunConfig& c, auto&, auto& v) { c.mode = parse_token_mode(v); }},
      {"x_view", [](RunConfig& c, auto&, auto& v) { c.x_view = parse_view_kind(v); }},
      {"d1_train", [](RunConfig& c, auto&, auto& v) { c.d1_train = v; }},
      {"d1_valid", [](RunConfig& c, auto&, auto& v) { c.d1_valid = v; }},
      {"d2_train", [](RunConfig& c, auto&, auto& v) { c.d2_train = v; }},
      {"d2_valid", [](RunConfig& c, auto&, auto& v) { c.d2_valid = v; }},
      {"test", [](RunConfig& c, auto&, auto& v) { c.test = v; }},
      {"embed_dim", [](RunConfig& c, auto& k, auto& v) { c.model.embed_dim = parse_count(k, v); }},
      {"hidden_dim", [](RunConfig& c, auto& k, auto& v) { c.model.hidden_dim = parse_count(k, v); }},
      {"cell", [](RunConfig&, auto& k, auto& v) {
         if (v != "gru") throw ConfigError("config key '" + k + "': only 'gru' is supported");
       }},
      {"max_decode_len", [](RunConfig& c, auto& k, auto& v) {
         if (v == "auto") {
           c.auto_decode_len = true;
         } else {
           c.model.max_decode_len = parse_count(k, v);
           c.auto_decode_len = false;
         }
       }},
      {"beam_width", [](RunConfig& c, auto& k, auto& v) { c.model.beam_width = parse_count(k, v); }},
      {"allow_dim_mismatch", [](RunConfig& c, auto& k, auto& v) { c.model.allow_dim_mismatch = parse_bool(k, v); }},
      {"lambda", [](RunConfig& c, auto& k, auto& v) { c.train.lambda = parse_number<double>(k, v); }},
      {"allow_lambda_override",
       [](RunConfig& c, auto& k, auto& v) { c.train.allow_lambda_override = parse_bool(k, v); }},
      {"learning_rate", [](RunConfig& c, auto& k, auto& v) { c.train.learning_rate = parse_number<double>(k, v); }},
      {"batch_size", [](RunConfig& c, auto& k, auto& v) { c.train.batch_size = parse_count(k, v); }},
      {"max_epochs", [](RunConfig& c, auto& k, auto& v) { c.train.max_epochs = parse_count(k, v); }},
      {"seed", [](RunConfig& c, auto& k, auto& v) { c.train.seed = parse_number<std::uint64_t>(k, v); }},
      {"var_floor", [](RunConfig& c, auto& k, auto& v) { c.train.var_floor = parse_number<double>(k, v); }},
      {"patience", [](RunConfig& c, auto& k, auto& v) { c.train.patience = parse_count(k, v); }},
      {"clip_norm", [](RunConfig& c, auto& k, auto& v) { c.train.clip_norm = parse_number<double>(k, v); }},
      {"standardize_at_inference",
       [](RunConfig& c, auto& k, auto& v) { c.standardize_at_inference = parse_bool(k, v); }},
      {"lambda_grid", [](RunConfig& c, auto& k, auto& v) { c.lambda_grid = parse_list(k, v); }},
      {"learning_rate_grid", [](RunConfig& c, auto& k, auto& v) { c.learning_rate_grid = parse_list(k, v); }},
  };
  return table;
}

bool is_path_key(const std::string& key) {
  return key == "d1_train" || key == "d1_valid" || key == "d2_train" || key == "d2_valid" || key == "test";
}

}  // namespace

void RunConfig::require_training_data() const {
  const std::pair<const char*, const std::string*> required[] = {
      {"d1_train", &d1_train}, {"d1_valid", &d1_valid}, {"d2_train", &d2_train}, {"d2_valid", &d2_valid}};
  for (const auto& [key, value] : required) {
    if (value->empty()) throw ConfigError("missing data path: config key '" + std::string(key) + "' is not set");
    if (!std::filesystem::exists(*value)) {
      throw ConfigError("config key '" + std::string(key) + "': file not found: " + *value);
    }
  }
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (model.beam_width == 0) throw ConfigError("beam_width must be at least 1");
  if (!auto_decode_len && model.max_decode_len == 0) throw ConfigError("max_decode_len must be positive");
  for (double lambda : lambda_grid) {
    auto probe = train;
    probe.lambda = lambda;
    probe.validate();
  }
  for (double lr : learning_rate_grid) {
    if (!(lr > 0.0)) throw ConfigError("learning_rate_grid entries must be positive");
  }
}

RunConfig parse_run_config(std::istream& in, const std::string& name, const std::string& base_dir) {
  RunConfig config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(name + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    auto key = trim(std::string_view(text).substr(0, eq));
    auto value = trim(std::string_view(text).substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError(name + ":" + std::to_string(number) + ": unknown config key '" + key + "'");
    }
    if (is_path_key(key) && !value.empty() && !base_dir.empty() && std::filesystem::path(value).is_relative()) {
      value = (std::filesystem::path(base_dir) / value).lexically_normal().string();
    }
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  return parse_run_config(in, path, std::filesystem::path(path).parent_path().string());
}

std::vector<std::pair<std::string, std::string>> run_config_entries(const RunConfig& c) {
  return {
      {"pipeline", to_string(c.pipeline)},
      {"mode", to_string(c.mode)},
      {"x_view", to_string(c.x_view)},
      {"d1_train", c.d1_train},
      {"d1_valid", c.d1_valid},
      {"d2_train", c.d2_train},
      {"d2_valid", c.d2_valid},
      {"test", c.test},
      {"embed_dim", std::to_string(c.model.embed_dim)},
      {"hidden_dim", std::to_string(c.model.hidden_dim)},
      {"cell", "gru"},
      {"max_decode_len", c.auto_decode_len ? "auto" : std::to_string(c.model.max_decode_len)},
      {"beam_width", std::to_string(c.model.beam_width)},
      {"allow_dim_mismatch", c.model.allow_dim_mismatch ? "true" : "false"},
      {"lambda", format_double(c.train.lambda)},
      {"allow_lambda_override", c.train.allow_lambda_override ? "true" : "false"},
      {"learning_rate", format_double(c.train.learning_rate)},
      {"batch_size", std::to_string(c.train.batch_size)},
      {"max_epochs", std::to_string(c.train.max_epochs)},
      {"seed", std::to_string(c.train.seed)},
      {"var_floor", format_double(c.train.var_floor)},
      {"patience", std::to_string(c.train.patience)},
      {"clip_norm", format_double(c.train.clip_norm)},
      {"standardize_at_inference", c.standardize_at_inference ? "true" : "false"},
      {"lambda_grid", format_list(c.lambda_grid)},
      {"learning_rate_grid", format_list(c.learning_rate_grid)},
  };
}

}  // namespace corrbridge
