#pragma once

#include <cstdint>
#include <vector>

#include "corrbridge/numerics/gradcheck.hpp"

namespace corrbridge {

/// Every differentiable op family plus the composite losses, built in double.
std::vector<GradcheckCase> gradcheck_suite();

/// Seeds first, first + 1, ...
std::vector<std::uint64_t> gradcheck_seeds(std::uint64_t first, std::size_t count);

}  // namespace corrbridge
