#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrbridge/data/batch.hpp"
#include "corrbridge/numerics/ops.hpp"
#include "corrbridge/numerics/tape.hpp"
#include "corrbridge/pipelines/pipelines.hpp"
#include "corrbridge/training/objectives.hpp"
#include "corrbridge/training/standardize.hpp"
#include "corrbridge/training/trainer.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace corrbridge;
using corrbridge::testing::small_bridge;
using corrbridge::testing::small_pivot_files;

namespace {

std::vector<float> snapshot(const ParameterList<float>& params) {
  std::vector<float> out;
  for (const auto& p : params) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

StandardizationStats<double> stats_of(const Tensor<double>& h) {
  return compute_stats<double>(h.data(), h.dim(1), 0.0);
}

}  // namespace

TEST_CASE("identity statistics leave representations unchanged") {
  auto h = Tensor<double>::matrix(2, 3, {0.1, -0.4, 2.0, 3.0, 0.0, -1.0});
  auto s = standardize(h, StandardizationStats<double>::identity(3));
  for (std::size_t i = 0; i < 6; ++i) CHECK(s.at(i) == h.at(i));
}

TEST_CASE("two-point dimension standardizes to -1 and +1") {
  auto h = Tensor<double>::matrix(2, 1, {2.0, 4.0});
  auto stats = compute_stats<double>(h.data(), 1, 1e-6);
  CHECK(stats.mean[0] == 3.0);
  CHECK(stats.var[0] == 1.0);
  auto s = standardize(h, stats);
  CHECK(s.at(0) == -1.0);
  CHECK(s.at(1) == 1.0);
}

TEST_CASE("identical representations give floor variance") {
  std::vector<double> reps{0.5, -0.25, 0.5, -0.25, 0.5, -0.25};
  auto stats = compute_stats<double>(reps, 2, 1e-3);
  CHECK(stats.mean == std::vector<double>{0.5, -0.25});
  CHECK(stats.var == std::vector<double>{1e-3, 1e-3});
}

TEST_CASE("perfect correlation gives -lambda and anti-correlation +lambda") {
  auto hx = Tensor<double>::matrix(4, 3, {0.1, 0.9, -0.3, 0.7, -0.2, 0.4, -0.5, 0.3, 0.8, 0.2, -0.6, 0.1});
  auto st = stats_of(hx);
  CHECK(correlation_loss(hx, hx, st, st, 0.7).item() == doctest::Approx(-0.7).epsilon(1e-12));

  // Mirror every row around the mean so s(hz) = -s(hx).
  std::vector<double> mirrored(12);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t d = 0; d < 3; ++d) mirrored[i * 3 + d] = 2 * st.mean[d] - hx.at(i, d);
  auto hz = Tensor<double>::matrix(4, 3, mirrored);
  CHECK(correlation_loss(hx, hz, st, stats_of(hz), 0.7).item() == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("correlation loss is invariant to a shared row permutation") {
  Rng rng(9);
  auto hx = Tensor<double>::zeros({5, 3});
  auto hz = Tensor<double>::zeros({5, 3});
  uniform_fill(hx, rng, 1.0);
  uniform_fill(hz, rng, 1.0);
  auto sx = stats_of(hx), sz = stats_of(hz);
  const std::size_t perm[] = {3, 0, 4, 1, 2};
  std::vector<double> px, pz;
  for (std::size_t r : perm) {
    for (std::size_t d = 0; d < 3; ++d) {
      px.push_back(hx.at(r, d));
      pz.push_back(hz.at(r, d));
    }
  }
  const double a = correlation_loss(hx, hz, sx, sz, 1.0).item();
  const double b = correlation_loss(Tensor<double>::matrix(5, 3, px), Tensor<double>::matrix(5, 3, pz), sx, sz, 1.0).item();
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("batch cross-entropy: singleton, duplication and padding") {
  Rng rng(4);
  Decoder<double> d(9, 5, 5, rng);
  std::vector<std::vector<int>> targets{{kBos, 4, 5, kEos}, {kBos, 6, kEos}, {kBos, 7, 8, 4, 5, kEos}};
  auto reps = Tensor<double>::zeros({3, 5});
  uniform_fill(reps, rng, 0.5);
  auto row = [&](std::size_t b) {
    std::vector<double> v(reps.data().begin() + static_cast<long>(b * 5), reps.data().begin() + static_cast<long>(b * 5 + 5));
    return Tensor<double>::matrix(1, 5, v);
  };

  std::vector<std::span<const int>> one{targets[0]};
  CHECK(batch_cross_entropy(d, row(0), pad_sequences(one)).item() ==
        doctest::Approx(sequence_nll(d, row(0), targets[0]).item()).epsilon(1e-12));

  std::vector<std::span<const int>> spans(targets.begin(), targets.end());
  const double value = batch_cross_entropy(d, reps, pad_sequences(spans)).item();
  double unbatched = 0.0;
  for (std::size_t b = 0; b < 3; ++b) unbatched += sequence_nll(d, row(b), targets[b]).item();
  CHECK(std::abs(value - unbatched / 3.0) <= 1e-6);

  std::vector<std::span<const int>> doubled;
  std::vector<double> doubled_reps;
  for (int k = 0; k < 2; ++k) {
    for (std::size_t b = 0; b < 3; ++b) {
      doubled.push_back(targets[b]);
      doubled_reps.insert(doubled_reps.end(), reps.data().begin() + static_cast<long>(b * 5),
                          reps.data().begin() + static_cast<long>(b * 5 + 5));
    }
  }
  CHECK(batch_cross_entropy(d, Tensor<double>::matrix(6, 5, doubled_reps), pad_sequences(doubled)).item() ==
        doctest::Approx(value).epsilon(1e-12));
}

TEST_CASE("epoch statistics standardize the training representations exactly") {
  auto files = small_pivot_files(60, 60);
  auto corpora = build_bridge_corpora(files);
  Rng rng(11);
  SequenceEncoder<double> enc(corpora.z_vocab.size(), 16, 16, rng);
  auto inputs = bridge_inputs(corpora.d1_train, corpora.d2_train).z;
  auto stats = update_epoch_stats(enc, inputs, 1e-12);
  auto reps = encode_all(enc, inputs);
  const std::size_t n = inputs.size();
  auto s = standardize(Tensor<double>::matrix(n, 16, reps), stats);
  for (std::size_t d = 0; d < 16; ++d) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < n; ++i) m += s.at(i, d);
    m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v += (s.at(i, d) - m) * (s.at(i, d) - m);
    v /= static_cast<double>(n);
    CHECK(std::abs(m) <= 1e-6);
    CHECK(std::abs(v - 1.0) <= 1e-6);
  }
}

TEST_CASE("equal batch counts alternate strictly") {
  auto s = alternation_schedule(10, 10);
  REQUIRE(s.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(s[i].kind == (i % 2 == 0 ? BatchKind::Correlation : BatchKind::CrossEntropy));
    CHECK(s[i].index == i / 2);
  }
}

TEST_CASE("the shorter corpus cycles") {
  auto s = alternation_schedule(2, 4);
  std::vector<ScheduleStep> expected{
      {BatchKind::Correlation, 0, 0}, {BatchKind::CrossEntropy, 0, 0}, {BatchKind::Correlation, 1, 0},
      {BatchKind::CrossEntropy, 1, 0}, {BatchKind::Correlation, 0, 1}, {BatchKind::CrossEntropy, 2, 0},
      {BatchKind::Correlation, 1, 1}, {BatchKind::CrossEntropy, 3, 0}};
  CHECK(s == expected);
  CHECK_THROWS_AS((void)alternation_schedule(0, 3), TrainingError);
}

TEST_CASE("gradients reach each component only from its objectives") {
  auto corpora = build_bridge_corpora(small_pivot_files(64, 96));
  auto model = small_bridge(corpora);
  TrainConfig cfg;
  cfg.batch_size = 16;
  auto state = TrainerState::start(cfg);
  auto r = joint_train_epoch(model, corpora.d1_train, corpora.d2_train, cfg, state);
  CHECK(r.steps == 12);
  CHECK(r.correlation_batches == 6);
  CHECK(r.cross_entropy_batches == 6);
  CHECK(r.x_grad_from_correlation > 0.0);
  CHECK(r.z_grad_from_correlation > 0.0);
  CHECK(r.z_grad_from_cross_entropy > 0.0);
  CHECK(r.y_grad_from_cross_entropy > 0.0);
  CHECK(r.x_grad_from_cross_entropy == 0.0);
  CHECK(r.y_grad_from_correlation == 0.0);
  CHECK(state.epoch == 1);
  CHECK(model.x_stats.dim() == 16);
}

TEST_CASE("lambda zero leaves the X encoder at its initial values") {
  auto corpora = build_bridge_corpora(small_pivot_files(48, 48));
  auto model = small_bridge(corpora);
  const auto before = snapshot(model.x_parameters());
  const auto z_before = snapshot(model.z_parameters());
  TrainConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.allow_lambda_override = true;
  cfg.validate();
  cfg.batch_size = 16;
  auto state = TrainerState::start(cfg);
  for (int e = 0; e < 2; ++e) joint_train_epoch(model, corpora.d1_train, corpora.d2_train, cfg, state);
  CHECK(snapshot(model.x_parameters()) == before);
  CHECK(snapshot(model.z_parameters()) != z_before);
}

TEST_CASE("lambda outside [0.1, 1] needs the override") {
  TrainConfig cfg;
  cfg.lambda = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.lambda = 0.1;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("a single-corpus epoch takes ceil(N / 32) steps") {
  auto corpora = build_two_stage_corpora(small_pivot_files(70, 20));
  Rng rng(2);
  auto model = EncoderDecoder<float>::create(testing::small_model(), corpora.d1_train.source_vocab,
                                             corpora.d1_train.target_vocab, TokenMode::Char, ViewKind::Sequence, rng);
  TrainConfig cfg;
  auto state = TrainerState::start(cfg);
  auto r = single_train_epoch(model, corpora.d1_train.examples, cfg, state);
  CHECK(r.steps == 3);
}

TEST_CASE("one small step lowers the loss on a frozen batch") {
  auto corpora = build_two_stage_corpora(small_pivot_files(32, 20));
  const auto& ex = corpora.d1_train.examples;
  int decreased = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    auto model = EncoderDecoder<float>::create(testing::small_model(), corpora.d1_train.source_vocab,
                                               corpora.d1_train.target_vocab, TokenMode::Char, ViewKind::Sequence, rng);
    std::vector<std::size_t> idx(ex.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto batch = collate(ex, idx);
    auto params = model.parameters();
    auto loss_now = [&] {
      NoGradScope<float> off;
      return batch_cross_entropy(model.decoder, model.encoder.encode_batch(batch), batch.target).item();
    };
    const float before = loss_now();
    Tape<float> tape;
    Tensor<float> loss;
    {
      TapeScope<float> scope(tape);
      loss = batch_cross_entropy(model.decoder, model.encoder.encode_batch(batch), batch.target);
    }
    tape.backward(loss);
    AdamState<float> adam(AdamConfig{1e-3});
    adam.step(params);
    if (loss_now() < before) ++decreased;
  }
  CHECK(decreased >= 19);
}

TEST_CASE("same seed gives identical loss traces") {
  auto corpora = build_bridge_corpora(small_pivot_files(40, 40));
  TrainConfig cfg;
  cfg.batch_size = 8;
  auto trace = [&] {
    auto model = small_bridge(corpora);
    auto state = TrainerState::start(cfg);
    std::vector<double> out;
    for (int e = 0; e < 2; ++e) {
      auto r = joint_train_epoch(model, corpora.d1_train, corpora.d2_train, cfg, state);
      out.push_back(r.mean_correlation_loss);
      out.push_back(r.mean_cross_entropy);
    }
    return out;
  };
  CHECK(trace() == trace());
}

TEST_CASE("an exploding loss surfaces as a training error") {
  auto corpora = build_bridge_corpora(small_pivot_files(16, 16));
  auto model = small_bridge(corpora);
  auto w = model.y_decoder.w_out.mutable_data();
  std::fill(w.begin(), w.end(), std::numeric_limits<float>::infinity());
  TrainConfig cfg;
  auto state = TrainerState::start(cfg);
  CHECK_THROWS_AS(joint_train_epoch(model, corpora.d1_train, corpora.d2_train, cfg, state), TrainingError);
}
