#pragma once

#include <cstddef>
#include <span>

namespace vton {

/// Pairwise (cascade) summation; the result depends only on the element order.
double pairwise_sum(std::span<const double> values);

/// Arithmetic mean via pairwise_sum. Throws kInvalidArgument when empty.
double mean(std::span<const double> values);

}  // namespace vton
