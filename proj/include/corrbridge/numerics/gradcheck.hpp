#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "corrbridge/numerics/tensor.hpp"

namespace corrbridge {

/// Central-difference gradient of f with respect to every element of
/// `params`. Parameters are perturbed in place and restored afterwards.
template <typename T>
std::vector<std::vector<T>> finite_difference_grad(const std::function<T()>& f,
                                                   std::span<Tensor<T>> params, T eps);

/// |a - b| / max(|a|, |b|, floor), maximised over elements.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor = 1e-6);

/// One randomised instance of a gradient check: the leaves to differentiate
/// and a closure building the scalar loss from them.
struct GradcheckInstance {
  std::vector<Tensor<double>> params;
  std::function<Tensor<double>()> loss;
};

struct GradcheckCase {
  std::string name;
  std::function<GradcheckInstance(std::uint64_t seed)> make;
};

struct GradcheckResult {
  std::string name;
  double worst_relative_error = 0.0;
  std::size_t instances = 0;
  bool passed = false;
  std::string failure;  // set when an instance threw
};

inline constexpr double kGradcheckTolerance = 1e-4;
inline constexpr double kGradcheckEps = 1e-5;

/// Runs backward() and finite differences on `seeds` instances of the case.
GradcheckResult run_gradcheck(const GradcheckCase& check, std::span<const std::uint64_t> seeds,
                              double tolerance = kGradcheckTolerance, double eps = kGradcheckEps);

}  // namespace corrbridge
