#include "corrbridge/cli/gradcheck_suite.hpp"

#include <random>

#include "corrbridge/numerics/init.hpp"
#include "corrbridge/numerics/ops.hpp"
#include "corrbridge/seqmodel/modules.hpp"
#include "corrbridge/training/objectives.hpp"
#include "corrbridge/training/standardize.hpp"

namespace corrbridge {

namespace {

using D = double;
using T = Tensor<D>;

T random(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<D> values(element_count(shape));
  for (auto& v : values) v = dist(rng);
  return T(std::move(shape), std::move(values));
}

/// Contracts a tensor with fixed random weights so every output element
/// carries a distinct gradient.
std::function<T(const T&)> projector(const Shape& shape, Rng& rng) {
  auto weights = random(shape, rng);
  return [weights](const T& y) { return sum(mul(y, weights)); };
}

GradcheckCase unary(std::string name, Shape shape, double lo, double hi, T (*op)(const T&)) {
  return {name, [=](std::uint64_t seed) {
            Rng rng(seed);
            auto a = random(shape, rng, lo, hi);
            auto project = projector(shape, rng);
            return GradcheckInstance{{a}, [=] { return project(op(a)); }};
          }};
}

GradcheckCase binary(std::string name, T (*op)(const T&, const T&)) {
  return {name, [=](std::uint64_t seed) {
            Rng rng(seed);
            auto a = random({3, 4}, rng);
            auto b = random({3, 4}, rng);
            auto project = projector({3, 4}, rng);
            return GradcheckInstance{{a, b}, [=] { return project(op(a, b)); }};
          }};
}

GradcheckCase row_broadcast(std::string name, double lo, double hi, T (*op)(const T&, const T&)) {
  return {name, [=](std::uint64_t seed) {
            Rng rng(seed);
            auto a = random({4, 3}, rng);
            auto v = random({3}, rng, lo, hi);
            auto project = projector({4, 3}, rng);
            return GradcheckInstance{{a, v}, [=] { return project(op(a, v)); }};
          }};
}

std::vector<Tensor<D>> leaves(const ParameterList<D>& params) {
  std::vector<Tensor<D>> out;
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

std::vector<int> random_ids(std::size_t n, int lo, int hi, Rng& rng) {
  std::uniform_int_distribution<int> dist(lo, hi);
  std::vector<int> ids(n);
  for (auto& id : ids) id = dist(rng);
  return ids;
}

}  // namespace

std::vector<std::uint64_t> gradcheck_seeds(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

std::vector<GradcheckCase> gradcheck_suite() {
  std::vector<GradcheckCase> suite;

  suite.push_back({"matmul", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto a = random({3, 4}, rng);
                     auto b = random({4, 2}, rng);
                     auto project = projector({3, 2}, rng);
                     return GradcheckInstance{{a, b}, [=] { return project(matmul(a, b)); }};
                   }});
  suite.push_back(binary("add", [](const T& a, const T& b) { return add(a, b); }));
  suite.push_back(binary("sub", [](const T& a, const T& b) { return sub(a, b); }));
  suite.push_back(binary("mul", [](const T& a, const T& b) { return mul(a, b); }));
  suite.push_back(unary("scale", {3, 4}, -1, 1, [](const T& a) { return scale(a, 1.7); }));
  suite.push_back(row_broadcast("add_row", -1, 1, [](const T& a, const T& v) { return add_row(a, v); }));
  suite.push_back(row_broadcast("sub_row", -1, 1, [](const T& a, const T& v) { return sub_row(a, v); }));
  suite.push_back(row_broadcast("div_row", 0.5, 2, [](const T& a, const T& v) { return div_row(a, v); }));
  suite.push_back(unary("tanh", {3, 4}, -2, 2, [](const T& a) { return tanh(a); }));
  suite.push_back(unary("sigmoid", {3, 4}, -3, 3, [](const T& a) { return sigmoid(a); }));
  suite.push_back(unary("softmax", {3, 5}, -2, 2, [](const T& a) { return softmax(a); }));
  suite.push_back(unary("log_softmax", {3, 5}, -2, 2, [](const T& a) { return log_softmax(a); }));
  suite.push_back(unary("log", {3, 4}, 0.5, 2, [](const T& a) { return log(a); }));
  suite.push_back({"gather_rows", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto table = random({5, 3}, rng);
                     auto ids = random_ids(6, 0, 4, rng);  // repeats exercise accumulation
                     auto project = projector({6, 3}, rng);
                     return GradcheckInstance{{table}, [=] { return project(gather_rows(table, ids)); }};
                   }});
  suite.push_back({"pick", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto a = random({4, 5}, rng);
                     auto cols = random_ids(4, 0, 4, rng);
                     auto project = projector({4}, rng);
                     return GradcheckInstance{{a}, [=] { return project(pick(a, cols)); }};
                   }});
  suite.push_back({"concat_cols", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto a = random({3, 2}, rng);
                     auto b = random({3, 4}, rng);
                     auto project = projector({3, 6}, rng);
                     return GradcheckInstance{{a, b}, [=] { return project(concat_cols<D>({a, b})); }};
                   }});
  suite.push_back({"slice_cols", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto a = random({3, 6}, rng);
                     auto project = projector({3, 3}, rng);
                     return GradcheckInstance{{a}, [=] { return project(slice_cols(a, 1, 4)); }};
                   }});
  suite.push_back({"reshape", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto a = random({3, 4}, rng);
                     auto project = projector({2, 6}, rng);
                     return GradcheckInstance{{a}, [=] { return project(reshape(a, {2, 6})); }};
                   }});
  suite.push_back({"sum", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto a = random({3, 4}, rng);
                     return GradcheckInstance{{a}, [=] { return sum(mul(a, a)); }};
                   }});
  suite.push_back({"mean", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto a = random({3, 4}, rng);
                     return GradcheckInstance{{a}, [=] { return mean(mul(a, a)); }};
                   }});

  suite.push_back({"gru_step", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto cell = GruCell<D>::create(3, 4, rng);
                     ParameterList<D> params;
                     cell.collect("gru", params);
                     for (auto p : params) uniform_fill(p.tensor, rng, 0.5);
                     auto x = random({2, 3}, rng);
                     auto h = random({2, 4}, rng, -0.9, 0.9);
                     auto project = projector({2, 4}, rng);
                     auto ls = leaves(params);
                     ls.push_back(x);
                     ls.push_back(h);
                     return GradcheckInstance{ls, [=] { return project(cell.step(x, h)); }};
                   }});
  suite.push_back({"standardize", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto h = random({4, 3}, rng);
                     StandardizationStats<D> stats;
                     std::uniform_real_distribution<double> mu(-0.5, 0.5), var(0.2, 2.0);
                     for (int d = 0; d < 3; ++d) {
                       stats.mean.push_back(mu(rng));
                       stats.var.push_back(var(rng));
                     }
                     auto project = projector({4, 3}, rng);
                     return GradcheckInstance{{h}, [=] { return project(standardize(h, stats)); }};
                   }});
  suite.push_back({"correlation_loss", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto hx = random({4, 3}, rng);
                     auto hz = random({4, 3}, rng);
                     auto sx = compute_stats<D>(hx.data(), 3, kDefaultVarFloor);
                     auto sz = compute_stats<D>(hz.data(), 3, kDefaultVarFloor);
                     return GradcheckInstance{{hx, hz}, [=] { return correlation_loss(hx, hz, sx, sz, 0.7); }};
                   }});
  suite.push_back({"sequence_nll", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto decoder = std::make_shared<Decoder<D>>(6, 4, 4, rng);
                     auto params = decoder->parameters("decoder");
                     for (auto p : params) uniform_fill(p.tensor, rng, 0.5);
                     auto rep = random({4}, rng, -0.9, 0.9);
                     auto target = random_ids(3, kReservedTokens, 5, rng);
                     target.insert(target.begin(), kBos);
                     target.push_back(kEos);
                     auto ls = leaves(params);
                     ls.push_back(rep);
                     return GradcheckInstance{ls, [=] { return sequence_nll(*decoder, rep, target); }};
                   }});
  suite.push_back({"batch_cross_entropy", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto encoder = std::make_shared<SequenceEncoder<D>>(7, 4, 4, rng);
                     auto decoder = std::make_shared<Decoder<D>>(6, 4, 4, rng);
                     auto params = encoder->parameters("encoder");
                     for (auto p : decoder->parameters("decoder")) params.push_back(p);
                     for (auto p : params) uniform_fill(p.tensor, rng, 0.5);
                     // ragged lengths exercise the padding masks
                     std::vector<std::vector<int>> src{random_ids(3, kReservedTokens, 6, rng),
                                                       random_ids(1, kReservedTokens, 6, rng),
                                                       random_ids(2, kReservedTokens, 6, rng)};
                     std::vector<std::vector<int>> tgt;
                     for (std::size_t len : {2u, 4u, 1u}) {
                       auto ids = random_ids(len, kReservedTokens, 5, rng);
                       ids.insert(ids.begin(), kBos);
                       ids.push_back(kEos);
                       tgt.push_back(ids);
                     }
                     auto source = pad_sequences({src[0], src[1], src[2]});
                     auto targets = pad_sequences({tgt[0], tgt[1], tgt[2]});
                     return GradcheckInstance{leaves(params), [=] {
                                                return batch_cross_entropy(*decoder, encoder->encode_batch(source),
                                                                           targets);
                                              }};
                   }});
  suite.push_back({"vector_encoder", [](std::uint64_t seed) {
                     Rng rng(seed);
                     auto encoder = std::make_shared<VectorEncoder<D>>(5, 3, rng);
                     auto params = encoder->parameters("encoder");
                     for (auto p : params) uniform_fill(p.tensor, rng, 0.5);
                     std::vector<double> features(2 * 5);
                     std::uniform_real_distribution<double> dist(-1, 1);
                     for (auto& f : features) f = dist(rng);
                     auto project = projector({2, 3}, rng);
                     return GradcheckInstance{leaves(params),
                                              [=] { return project(encoder->encode_batch(features, 2)); }};
                   }});
  return suite;
}

}  // namespace corrbridge
