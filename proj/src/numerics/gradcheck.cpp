#include "corrbridge/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "corrbridge/numerics/tape.hpp"

namespace corrbridge {

template <typename T>
std::vector<std::vector<T>> finite_difference_grad(const std::function<T()>& f,
                                                   std::span<Tensor<T>> params, T eps) {
  if (!(eps > T(0))) throw NumericsError("finite_difference_grad: eps must be positive");
  std::vector<std::vector<T>> grads;
  grads.reserve(params.size());
  for (auto& p : params) {
    auto values = p.mutable_data();
    std::vector<T> g(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T original = values[i];
      values[i] = original + eps;
      const T plus = f();
      values[i] = original - eps;
      const T minus = f();
      values[i] = original;
      g[i] = (plus - minus) / (T(2) * eps);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric, double floor) {
  if (analytic.size() != numeric.size()) {
    throw ShapeError("max_relative_error", "length " + std::to_string(analytic.size()) + " vs " +
                                               std::to_string(numeric.size()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], b = numeric[i];
    const double denom = std::max({std::abs(a), std::abs(b), floor});
    worst = std::max(worst, std::abs(a - b) / denom);
  }
  return worst;
}

GradcheckResult run_gradcheck(const GradcheckCase& check, std::span<const std::uint64_t> seeds, double tolerance,
                              double eps) {
  GradcheckResult result;
  result.name = check.name;
  try {
    for (auto seed : seeds) {
      GradcheckInstance instance = check.make(seed);
      for (auto& p : instance.params) p.set_requires_grad(true);

      Tape<double> tape;
      Tensor<double> loss;
      {
        TapeScope<double> scope(tape);
        loss = instance.loss();
      }
      backward(tape, loss);
      std::vector<std::vector<double>> analytic;
      for (auto& p : instance.params) {
        if (!p.has_grad()) p.zero_grad();
        analytic.emplace_back(p.grad().begin(), p.grad().end());
      }

      std::function<double()> f = [&] { return instance.loss().item(); };
      auto numeric = finite_difference_grad<double>(f, instance.params, eps);
      for (std::size_t k = 0; k < analytic.size(); ++k) {
        result.worst_relative_error =
            std::max(result.worst_relative_error, max_relative_error(analytic[k], numeric[k]));
      }
      ++result.instances;
    }
    result.passed = result.worst_relative_error <= tolerance;
  } catch (const std::exception& e) {
    result.passed = false;
    result.failure = e.what();
  }
  return result;
}

template std::vector<std::vector<float>> finite_difference_grad<float>(const std::function<float()>&,
                                                                       std::span<Tensor<float>>, float);
template std::vector<std::vector<double>> finite_difference_grad<double>(const std::function<double()>&,
                                                                         std::span<Tensor<double>>, double);

}  // namespace corrbridge
