#include <cstring>
#include <fstream>
#include <sstream>

#include "corrbridge/training/checkpoint.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace corrbridge;
using corrbridge::testing::scratch;
using corrbridge::testing::small_bridge;
using corrbridge::testing::small_pivot_files;

namespace {

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

bool bit_identical(const ParameterList<float>& a, const ParameterList<float>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].tensor.shape() != b[i].tensor.shape()) return false;
    if (std::memcmp(a[i].tensor.data().data(), b[i].tensor.data().data(), a[i].tensor.size() * sizeof(float)) != 0)
      return false;
  }
  return true;
}

struct Trained {
  BridgeCorpora corpora;
  BridgeModel<float> model;
  TrainConfig cfg;
  TrainerState state;
};

Trained one_epoch() {
  auto corpora = build_bridge_corpora(small_pivot_files(40, 40));
  auto model = small_bridge(corpora);
  TrainConfig cfg;
  cfg.batch_size = 8;
  auto state = TrainerState::start(cfg);
  joint_train_epoch(model, corpora.d1_train, corpora.d2_train, cfg, state);
  return Trained{std::move(corpora), std::move(model), cfg, std::move(state)};
}

}  // namespace

TEST_CASE("save then load restores every tensor bit for bit") {
  auto dir = scratch("ckpt_roundtrip");
  auto t = one_epoch();
  const auto path = (dir / "m.ckpt").string();
  save_checkpoint(path, t.model, t.cfg, t.state);
  CHECK(checkpoint_pipeline(path) == "correlational");
  auto loaded = load_bridge_checkpoint(path);
  CHECK(bit_identical(loaded.model.parameters(), t.model.parameters()));
  CHECK(loaded.model.x_stats.mean == t.model.x_stats.mean);
  CHECK(loaded.model.z_stats.var == t.model.z_stats.var);
  CHECK(loaded.model.x_vocab == t.model.x_vocab);
  CHECK(loaded.model.y_vocab == t.model.y_vocab);
  CHECK(loaded.state.epoch == 1);
  CHECK(loaded.state.rng == t.state.rng);
  CHECK(loaded.state.adam.slots().size() == t.state.adam.slots().size());
}

TEST_CASE("container encoding round trips") {
  CheckpointFile f;
  f.metadata = "{\"k\":1}";
  f.tensors.push_back({"a", {2, 3}, {1, 2, 3, 4, 5, 6}});
  f.tensors.push_back({"b", {1}, {-0.5f}});
  auto back = decode_checkpoint(encode_checkpoint(f));
  CHECK(back.metadata == f.metadata);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.tensors[0].shape == Shape{2, 3});
  CHECK(back.tensors[1].data == std::vector<float>{-0.5f});
}

TEST_CASE("corrupt containers are rejected") {
  CheckpointFile f;
  f.metadata = "{}";
  f.tensors.push_back({"a", {2}, {1, 2}});
  const auto bytes = encode_checkpoint(f);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS((void)decode_checkpoint(bad_magic), CheckpointError);

  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_WITH_AS((void)decode_checkpoint(bad_version), doctest::Contains("version"), CheckpointError);

  CHECK_THROWS_AS((void)decode_checkpoint(bytes.substr(0, bytes.size() - 3)), CheckpointError);
  CHECK_THROWS_AS((void)decode_checkpoint(bytes + "x"), CheckpointError);
}

TEST_CASE("a checkpoint with bad magic leaves nothing behind") {
  auto dir = scratch("ckpt_magic");
  auto t = one_epoch();
  const auto path = (dir / "m.ckpt").string();
  save_checkpoint(path, t.model, t.cfg, t.state);
  auto bytes = read_bytes(path);
  bytes.replace(0, 4, "NOPE");
  write_bytes(path, bytes);
  CHECK_THROWS_AS((void)load_bridge_checkpoint(path), CheckpointError);
}

TEST_CASE("a truncated checkpoint is rejected") {
  auto dir = scratch("ckpt_trunc");
  auto t = one_epoch();
  const auto path = (dir / "m.ckpt").string();
  save_checkpoint(path, t.model, t.cfg, t.state);
  auto bytes = read_bytes(path);
  write_bytes(path, bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS((void)load_bridge_checkpoint(path), CheckpointError);
}

TEST_CASE("a tensor whose shape disagrees with the config is rejected") {
  auto dir = scratch("ckpt_shape");
  auto t = one_epoch();
  const auto path = (dir / "m.ckpt").string();
  save_checkpoint(path, t.model, t.cfg, t.state);
  auto file = read_checkpoint_file(path);
  for (auto& rec : file.tensors) {
    if (rec.name.find("y_decoder") == 0 && rec.shape.size() == 2) {
      rec.shape = {rec.shape[1], rec.shape[0]};
      break;
    }
  }
  write_checkpoint_file(path, file);
  CHECK_THROWS_WITH_AS((void)load_bridge_checkpoint(path), doctest::Contains("shape"), CheckpointError);
}

TEST_CASE("a missing tensor is rejected") {
  auto dir = scratch("ckpt_missing");
  auto t = one_epoch();
  const auto path = (dir / "m.ckpt").string();
  save_checkpoint(path, t.model, t.cfg, t.state);
  auto file = read_checkpoint_file(path);
  file.tensors.pop_back();
  write_checkpoint_file(path, file);
  CHECK_THROWS_AS((void)load_bridge_checkpoint(path), CheckpointError);
}

TEST_CASE("loading the wrong pipeline kind fails") {
  auto dir = scratch("ckpt_kind");
  auto t = one_epoch();
  const auto path = (dir / "m.ckpt").string();
  save_checkpoint(path, t.model, t.cfg, t.state);
  CHECK_THROWS_AS((void)load_two_stage_checkpoint(path), CheckpointError);
  CHECK_THROWS_AS((void)load_bridge_checkpoint((dir / "absent.ckpt").string()), CheckpointError);
}

TEST_CASE("resuming from a checkpoint matches uninterrupted training") {
  auto dir = scratch("ckpt_resume");
  auto straight = one_epoch();
  auto resumed = one_epoch();
  joint_train_epoch(straight.model, straight.corpora.d1_train, straight.corpora.d2_train, straight.cfg,
                    straight.state);

  const auto path = (dir / "m.ckpt").string();
  save_checkpoint(path, resumed.model, resumed.cfg, resumed.state);
  auto loaded = load_bridge_checkpoint(path);
  joint_train_epoch(loaded.model, resumed.corpora.d1_train, resumed.corpora.d2_train, loaded.train, loaded.state);

  CHECK(bit_identical(loaded.model.parameters(), straight.model.parameters()));
  CHECK(loaded.model.x_stats.mean == straight.model.x_stats.mean);
  CHECK(loaded.state.rng == straight.state.rng);
}

TEST_CASE("two-stage checkpoints round trip") {
  auto dir = scratch("ckpt_two_stage");
  auto corpora = build_two_stage_corpora(small_pivot_files(20, 20));
  Rng rng(1);
  auto cfg = testing::small_model();
  TwoStageModel model{
      EncoderDecoder<float>::create(cfg, corpora.d1_train.source_vocab, corpora.d1_train.target_vocab,
                                    TokenMode::Char, ViewKind::Sequence, rng),
      EncoderDecoder<float>::create(cfg, corpora.d2_train.source_vocab, corpora.d2_train.target_vocab,
                                    TokenMode::Char, ViewKind::Sequence, rng)};
  TrainConfig train;
  const auto path = (dir / "m.ckpt").string();
  save_checkpoint(path, model, train, TrainerState::start(train), TrainerState::start(train));
  CHECK(checkpoint_pipeline(path) == "two-stage");
  auto loaded = load_two_stage_checkpoint(path);
  CHECK(bit_identical(loaded.model.stage1.parameters(), model.stage1.parameters()));
  CHECK(bit_identical(loaded.model.stage2.parameters(), model.stage2.parameters()));
  CHECK(loaded.model.stage2.target_vocab == model.stage2.target_vocab);
}
