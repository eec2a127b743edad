#include "corrbridge/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace corrbridge {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'C', 'B', 'R', 'G'};
constexpr std::uint64_t kMaxRank = 8;

static_assert(std::numeric_limits<float>::is_iec559, "checkpoints store IEEE-754 binary32");

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  std::string_view take(std::uint64_t n, const char* what) {
    if (n > bytes_.size() - pos_) {
      throw CheckpointError(name_ + ": truncated file while reading " + what + " at byte " + std::to_string(pos_));
    }
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint64_t u64(const char* what) { return little_endian(take(8, what)); }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(little_endian(take(4, what))); }
  std::uint64_t remaining() const { return bytes_.size() - pos_; }

 private:
  static std::uint64_t little_endian(std::string_view raw) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) v |= std::uint64_t(static_cast<unsigned char>(raw[i])) << (8 * i);
    return v;
  }

  std::string_view bytes_;
  std::string name_;
  std::uint64_t pos_ = 0;
};

json model_config_json(const ModelConfig& c) {
  return {{"embed_dim", c.embed_dim},       {"hidden_dim", c.hidden_dim},   {"cell", "gru"},
          {"max_decode_len", c.max_decode_len}, {"beam_width", c.beam_width}, {"feature_dim", c.feature_dim},
          {"allow_dim_mismatch", c.allow_dim_mismatch}};
}

ModelConfig model_config_from(const json& j) {
  if (j.at("cell").get<std::string>() != "gru") throw CheckpointError("unsupported cell type in checkpoint");
  ModelConfig c;
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.max_decode_len = j.at("max_decode_len").get<std::size_t>();
  c.beam_width = j.at("beam_width").get<std::size_t>();
  c.feature_dim = j.at("feature_dim").get<std::size_t>();
  c.allow_dim_mismatch = j.at("allow_dim_mismatch").get<bool>();
  return c;
}

json train_config_json(const TrainConfig& c) {
  return {{"lambda", c.lambda},         {"allow_lambda_override", c.allow_lambda_override},
          {"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs}, {"seed", c.seed},
          {"var_floor", c.var_floor},   {"patience", c.patience},
          {"clip_norm", c.clip_norm}};
}

TrainConfig train_config_from(const json& j) {
  TrainConfig c;
  c.lambda = j.at("lambda").get<double>();
  c.allow_lambda_override = j.at("allow_lambda_override").get<bool>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.var_floor = j.at("var_floor").get<double>();
  c.patience = j.at("patience").get<std::size_t>();
  c.clip_norm = j.at("clip_norm").get<double>();
  return c;
}

Vocab vocab_from(const json& j) {
  auto tokens = j.get<std::vector<std::string>>();
  return Vocab::from_tokens(tokens);
}

void add_tensor(CheckpointFile& file, const std::string& name, const Shape& shape, std::span<const float> data) {
  file.tensors.push_back(TensorRecord{name, shape, std::vector<float>(data.begin(), data.end())});
}

void add_parameters(CheckpointFile& file, const ParameterList<float>& params) {
  for (const auto& p : params) add_tensor(file, p.name, p.tensor.shape(), p.tensor.data());
}

void add_stats(CheckpointFile& file, const std::string& prefix, const StandardizationStats<float>& stats) {
  add_tensor(file, prefix + ".mean", {stats.dim()}, stats.mean);
  add_tensor(file, prefix + ".var", {stats.dim()}, stats.var);
}

json trainer_state_json(CheckpointFile& file, const std::string& prefix, const TrainerState& state) {
  std::ostringstream rng;
  rng << state.rng;
  json steps = json::object();
  for (const auto& [name, slot] : state.adam.slots()) {
    steps[name] = slot.t;
    add_tensor(file, prefix + "adam.m." + name, {slot.m.size()}, slot.m);
    add_tensor(file, prefix + "adam.v." + name, {slot.v.size()}, slot.v);
  }
  const auto& adam = state.adam.config();
  return {{"rng", rng.str()},
          {"epoch", state.epoch},
          {"best_score", state.best_score},
          {"best_epoch", state.best_epoch},
          {"epochs_since_best", state.epochs_since_best},
          {"adam",
           {{"learning_rate", adam.learning_rate},
            {"beta1", adam.beta1},
            {"beta2", adam.beta2},
            {"epsilon", adam.epsilon},
            {"steps", steps}}}};
}

/// Records by name; every one must be claimed exactly once.
class RecordTable {
 public:
  RecordTable(CheckpointFile&& file, std::string name) : name_(std::move(name)) {
    for (auto& r : file.tensors) {
      auto key = r.name;
      if (!records_.emplace(key, std::move(r)).second) throw CheckpointError(name_ + ": duplicate tensor " + key);
    }
  }

  TensorRecord take(const std::string& key) {
    auto it = records_.find(key);
    if (it == records_.end()) throw CheckpointError(name_ + ": missing tensor " + key);
    auto out = std::move(it->second);
    records_.erase(it);
    return out;
  }

  void fill(const std::string& key, Tensor<float>& tensor) {
    auto rec = take(key);
    if (rec.shape != tensor.shape()) {
      throw CheckpointError(name_ + ": tensor " + key + " has shape " + shape_string(rec.shape) +
                            " but the configuration implies " + shape_string(tensor.shape()));
    }
    std::copy(rec.data.begin(), rec.data.end(), tensor.mutable_data().begin());
  }

  void fill(const ParameterList<float>& params) {
    for (auto p : params) fill(p.name, p.tensor);
  }

  StandardizationStats<float> stats(const std::string& prefix, std::size_t dim) {
    StandardizationStats<float> s;
    s.mean = take_vector(prefix + ".mean", dim);
    s.var = take_vector(prefix + ".var", dim);
    for (auto v : s.var) {
      if (!(v > 0.0f)) throw CheckpointError(name_ + ": non-positive variance in " + prefix);
    }
    return s;
  }

  std::vector<float> take_vector(const std::string& key, std::size_t n) {
    auto rec = take(key);
    if (rec.shape != Shape{n}) {
      throw CheckpointError(name_ + ": tensor " + key + " has shape " + shape_string(rec.shape) + ", expected [" +
                            std::to_string(n) + "]");
    }
    return std::move(rec.data);
  }

  void finish() const {
    if (!records_.empty()) throw CheckpointError(name_ + ": unexpected tensor " + records_.begin()->first);
  }

  const std::string& name() const { return name_; }

 private:
  std::map<std::string, TensorRecord> records_;
  std::string name_;
};

TrainerState trainer_state_from(const json& j, const std::string& prefix, const ParameterList<float>& params,
                                RecordTable& table) {
  TrainerState state;
  AdamConfig adam;
  const auto& ja = j.at("adam");
  adam.learning_rate = ja.at("learning_rate").get<double>();
  adam.beta1 = ja.at("beta1").get<double>();
  adam.beta2 = ja.at("beta2").get<double>();
  adam.epsilon = ja.at("epsilon").get<double>();
  state.adam = AdamState<float>(adam);

  std::map<std::string, std::size_t> sizes;
  for (const auto& p : params) sizes[p.name] = p.tensor.size();
  for (const auto& [name, t] : ja.at("steps").items()) {
    auto it = sizes.find(name);
    if (it == sizes.end()) throw CheckpointError(table.name() + ": optimizer state for unknown parameter " + name);
    AdamSlot<float> slot;
    slot.t = t.get<std::uint64_t>();
    slot.m = table.take_vector(prefix + "adam.m." + name, it->second);
    slot.v = table.take_vector(prefix + "adam.v." + name, it->second);
    state.adam.slots().emplace(name, std::move(slot));
  }

  std::istringstream rng(j.at("rng").get<std::string>());
  rng >> state.rng;
  if (rng.fail()) throw CheckpointError(table.name() + ": unreadable RNG state");
  state.epoch = j.at("epoch").get<std::size_t>();
  state.best_score = j.at("best_score").get<double>();
  state.best_epoch = j.at("best_epoch").get<std::size_t>();
  state.epochs_since_best = j.at("epochs_since_best").get<std::size_t>();
  return state;
}

json encoder_decoder_json(const EncoderDecoder<float>& m) {
  return {{"model_config", model_config_json(m.config)},
          {"mode", to_string(m.mode)},
          {"source_kind", to_string(m.encoder.kind())},
          {"source_vocab", m.source_vocab.tokens()},
          {"target_vocab", m.target_vocab.tokens()}};
}

EncoderDecoder<float> encoder_decoder_from(const json& j, const std::string& prefix, RecordTable& table) {
  Rng scratch(0);
  auto model = EncoderDecoder<float>::create(
      model_config_from(j.at("model_config")), vocab_from(j.at("source_vocab")), vocab_from(j.at("target_vocab")),
      parse_token_mode(j.at("mode").get<std::string>()), parse_view_kind(j.at("source_kind").get<std::string>()),
      scratch);
  auto params = model.parameters();
  for (auto& p : params) p.name = prefix + p.name;
  table.fill(params);
  return model;
}

ParameterList<float> prefixed(ParameterList<float> params, const std::string& prefix) {
  for (auto& p : params) p.name = prefix + p.name;
  return params;
}

json parse_metadata(const CheckpointFile& file, const std::string& name, const char* expected_pipeline) {
  json meta;
  try {
    meta = json::parse(file.metadata);
  } catch (const json::parse_error& e) {
    throw CheckpointError(name + ": malformed metadata: " + e.what());
  }
  auto pipeline = meta.value("pipeline", std::string());
  if (pipeline != expected_pipeline) {
    throw CheckpointError(name + ": checkpoint holds a '" + pipeline + "' model, expected '" + expected_pipeline +
                          "'");
  }
  return meta;
}

template <typename Fn>
auto guarded(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const CheckpointError&) {
    throw;
  } catch (const json::exception& e) {
    throw CheckpointError(name + ": malformed metadata: " + e.what());
  } catch (const std::exception& e) {
    throw CheckpointError(name + ": " + e.what());
  }
}

}  // namespace

std::string encode_checkpoint(const CheckpointFile& file) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u64(out, file.metadata.size());
  out += file.metadata;
  put_u64(out, file.tensors.size());
  for (const auto& t : file.tensors) {
    if (t.data.size() != element_count(t.shape)) throw CheckpointError("tensor " + t.name + ": data/shape mismatch");
    put_u64(out, t.name.size());
    out += t.name;
    put_u64(out, t.shape.size());
    for (auto extent : t.shape) put_u64(out, extent);
    for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

CheckpointFile decode_checkpoint(std::string_view bytes, const std::string& name) {
  Reader in(bytes, name);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(name + ": not a checkpoint (bad magic bytes)");
  }
  in.take(sizeof(kMagic), "magic");
  auto version = in.u32("format version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(name + ": unsupported format version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  CheckpointFile file;
  file.metadata = std::string(in.take(in.u64("metadata length"), "metadata"));
  auto count = in.u64("tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    TensorRecord rec;
    rec.name = std::string(in.take(in.u64("tensor name length"), "tensor name"));
    auto rank = in.u64("tensor rank");
    if (rank > kMaxRank) throw CheckpointError(name + ": tensor " + rec.name + " has implausible rank");
    std::uint64_t elements = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      auto extent = in.u64("tensor extent");
      if (extent == 0 || extent > in.remaining() / 4 || elements > in.remaining() / 4 / extent) {
        throw CheckpointError(name + ": truncated file or bad extent in tensor " + rec.name);
      }
      elements *= extent;
      rec.shape.push_back(static_cast<std::size_t>(extent));
    }
    auto raw = in.take(elements * 4, "tensor data");
    rec.data.resize(elements);
    for (std::uint64_t e = 0; e < elements; ++e) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t(static_cast<unsigned char>(raw[e * 4 + b])) << (8 * b);
      rec.data[e] = std::bit_cast<float>(bits);
    }
    file.tensors.push_back(std::move(rec));
  }
  if (in.remaining() != 0) throw CheckpointError(name + ": trailing bytes after the last tensor");
  return file;
}

void write_checkpoint_file(const std::string& path, const CheckpointFile& file) {
  auto bytes = encode_checkpoint(file);
  auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place at " + path + ": " + ec.message());
}

CheckpointFile read_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_checkpoint(buffer.str(), path);
}

void save_checkpoint(const std::string& path, const BridgeModel<float>& model, const TrainConfig& train,
                     const TrainerState& state) {
  CheckpointFile file;
  add_parameters(file, model.parameters());
  add_stats(file, "stats.x", model.x_stats);
  add_stats(file, "stats.z", model.z_stats);
  json meta = {{"pipeline", "correlational"},
               {"model_config", model_config_json(model.config)},
               {"train_config", train_config_json(train)},
               {"mode", to_string(model.mode)},
               {"x_kind", to_string(model.x_encoder.kind())},
               {"standardize_at_inference", model.standardize_at_inference},
               {"vocabs", {{"x", model.x_vocab.tokens()}, {"z", model.z_vocab.tokens()}, {"y", model.y_vocab.tokens()}}}};
  meta["trainer"] = trainer_state_json(file, "", state);
  file.metadata = meta.dump();
  write_checkpoint_file(path, file);
}

void save_checkpoint(const std::string& path, const TwoStageModel& model, const TrainConfig& train,
                     const TrainerState& stage1_state, const TrainerState& stage2_state) {
  CheckpointFile file;
  add_parameters(file, prefixed(model.stage1.parameters(), "stage1."));
  add_parameters(file, prefixed(model.stage2.parameters(), "stage2."));
  json meta = {{"pipeline", "two-stage"},
               {"train_config", train_config_json(train)},
               {"stage1", encoder_decoder_json(model.stage1)},
               {"stage2", encoder_decoder_json(model.stage2)}};
  meta["stage1"]["trainer"] = trainer_state_json(file, "stage1.", stage1_state);
  meta["stage2"]["trainer"] = trainer_state_json(file, "stage2.", stage2_state);
  file.metadata = meta.dump();
  write_checkpoint_file(path, file);
}

BridgeCheckpoint load_bridge_checkpoint(const std::string& path) {
  return guarded(path, [&] {
    auto file = read_checkpoint_file(path);
    auto meta = parse_metadata(file, path, "correlational");
    RecordTable table(std::move(file), path);
    Rng scratch(0);
    const auto& vocabs = meta.at("vocabs");
    auto model = BridgeModel<float>::create(
        model_config_from(meta.at("model_config")), vocab_from(vocabs.at("x")), vocab_from(vocabs.at("z")),
        vocab_from(vocabs.at("y")), parse_token_mode(meta.at("mode").get<std::string>()),
        parse_view_kind(meta.at("x_kind").get<std::string>()), scratch);
    auto params = model.parameters();
    table.fill(params);
    model.x_stats = table.stats("stats.x", model.config.hidden_dim);
    model.z_stats = table.stats("stats.z", model.config.hidden_dim);
    model.standardize_at_inference = meta.at("standardize_at_inference").get<bool>();
    auto train = train_config_from(meta.at("train_config"));
    auto state = trainer_state_from(meta.at("trainer"), "", params, table);
    table.finish();
    return BridgeCheckpoint{std::move(model), train, std::move(state)};
  });
}

TwoStageCheckpoint load_two_stage_checkpoint(const std::string& path) {
  return guarded(path, [&] {
    auto file = read_checkpoint_file(path);
    auto meta = parse_metadata(file, path, "two-stage");
    RecordTable table(std::move(file), path);
    auto stage1 = encoder_decoder_from(meta.at("stage1"), "stage1.", table);
    auto stage2 = encoder_decoder_from(meta.at("stage2"), "stage2.", table);
    auto s1 = trainer_state_from(meta.at("stage1").at("trainer"), "stage1.", stage1.parameters(), table);
    auto s2 = trainer_state_from(meta.at("stage2").at("trainer"), "stage2.", stage2.parameters(), table);
    auto train = train_config_from(meta.at("train_config"));
    table.finish();
    return TwoStageCheckpoint{TwoStageModel{std::move(stage1), std::move(stage2)}, train, std::move(s1),
                              std::move(s2)};
  });
}

std::string checkpoint_pipeline(const std::string& path) {
  return guarded(path, [&] {
    auto file = read_checkpoint_file(path);
    return json::parse(file.metadata).at("pipeline").get<std::string>();
  });
}

}  // namespace corrbridge
