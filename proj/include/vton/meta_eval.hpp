#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vton/core/types.hpp"

namespace vton::meta {

/// Ranks 1..n; tied values share the average of their positional ranks.
std::vector<double> average_ranks(std::span<const double> values);

// All three need equal lengths >= 3 and non-constant inputs; otherwise they
// throw kDimensionMismatch / kInvalidArgument / kUndefinedCorrelation.
double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson on average ranks.
double spearman(std::span<const double> x, std::span<const double> y);
/// Tau-b, O(n log n) via sort and merge-count of discordant pairs.
double kendall_tau(std::span<const double> x, std::span<const double> y);

struct HumanItemMean {
  std::string triplet_id;
  std::string method_id;
  std::array<double, kVlmDimensions + 1> means{};  // five dimensions + s_avg
  std::size_t ratings = 0;
  bool complete = false;  // at least kMinRatings ratings
};

inline constexpr std::size_t kMinRatings = 2;

/// Mean per (triplet, method, dimension), sorted by (triplet, method).
std::vector<HumanItemMean> aggregate_human(std::span<const HumanRating> ratings);

struct HumanMethodMean {
  std::string method_id;
  std::array<double, kVlmDimensions + 1> means{};
  std::size_t items = 0;
  std::size_t incomplete_items = 0;
};

/// Method means over complete items only; incomplete items are counted.
std::vector<HumanMethodMean> human_method_means(std::span<const HumanItemMean> items);

/// Human column names: s_bg, s_id, s_tex, s_shape, s_real, s_avg.
int human_column_index(const std::string& name);

/// A named metric column; lower_is_better columns are negated before
/// correlation and labelled with a leading '-'. Missing entries are dropped
/// pairwise together with the matching human value.
struct MetricColumn {
  std::string name;
  std::vector<std::optional<double>> values;
  std::vector<double> human;
  bool lower_is_better = false;
};

CorrelationRow correlate_column(const MetricColumn& column);

/// Method-level correlations (n = number of methods). Headline columns
/// (s_avg VLM, S̄, PSNR, SSIM, -LPIPS, -FID) and the representation detail
/// columns are correlated against `human_column`; each VLM dimension is
/// correlated against the same human dimension. Columns that are missing
/// for some method or constant are skipped.
CorrelationReport correlate_all(std::span<const MethodAggregate> aggregates,
                                const std::string& human_column = "s_avg");

}  // namespace vton::meta
