#include "vton/core/numeric.hpp"

#include "vton/core/error.hpp"

namespace vton {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "mean of an empty set");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

}  // namespace vton
