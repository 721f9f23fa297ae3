#include "vton/curation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "vton/core/error.hpp"
#include "vton/core/numeric.hpp"

namespace vton::curation {
namespace {

// Draws in [0, n) by rejection so results do not depend on the standard
// library's distribution implementations.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % bound);
}

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

bool resolution_filter(int width, int height) {
  return std::min(width, height) >= kMinSide && std::max(width, height) <= kMaxSide;
}

KMeansResult kmeans_cluster(std::span<const std::vector<double>> points, const KMeansOptions& options) {
  if (points.empty()) fail(ErrorCode::kInvalidArgument, "k-means on an empty input");
  if (options.k < 1) fail(ErrorCode::kInvalidArgument, "k must be positive");
  const std::size_t n = points.size();
  const auto k = static_cast<std::size_t>(options.k);
  if (n < k) {
    fail(ErrorCode::kInvalidArgument,
         "k-means needs n >= k (n = " + std::to_string(n) + ", k = " + std::to_string(k) + ")");
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) fail(ErrorCode::kDimensionMismatch, "k-means points differ in dimension");
  }

  std::mt19937_64 rng(options.seed);
  KMeansResult result;
  auto& centroids = result.centroids;
  centroids.push_back(points[uniform_index(rng, n)]);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points[i], centroids[0]);
  while (centroids.size() < k) {
    const double total = pairwise_sum(nearest);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = uniform_unit(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform_index(rng, n);
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], centroids.back()));
    }
  }

  std::vector<int> labels(n, 0);
  std::vector<double> dist2(n, 0.0);
  auto assign = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points[i], centroids[c]);
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      labels[i] = best_c;
      dist2[i] = best;
    }
    result.inertia_history.push_back(pairwise_sum(dist2));
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    assign();
    ++result.iterations;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[labels[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
      ++counts[labels[i]];
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (auto& v : sums[c]) v /= static_cast<double>(counts[c]);
      movement = std::max(movement, std::sqrt(squared_distance(sums[c], centroids[c])));
      centroids[c] = std::move(sums[c]);
    }
    if (movement < options.tolerance) break;
  }
  assign();

  result.inertia = result.inertia_history.back();
  result.assignments.reserve(n);
  for (std::size_t i = 0; i < n; ++i) result.assignments.push_back({i, labels[i], std::sqrt(dist2[i])});
  return result;
}

std::vector<std::size_t> stratified_quotas(std::span<const std::size_t> cluster_sizes,
                                           std::size_t target_n) {
  const std::size_t available = std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), std::size_t{0});
  if (target_n > available) {
    fail(ErrorCode::kInvalidArgument, "target_n " + std::to_string(target_n) + " exceeds the " +
                                          std::to_string(available) + " available items");
  }
  if (cluster_sizes.empty()) return {};
  const std::size_t base = target_n / cluster_sizes.size();
  std::vector<std::size_t> quotas(cluster_sizes.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < cluster_sizes.size(); ++c) {
    quotas[c] = std::min(cluster_sizes[c], base);
    assigned += quotas[c];
  }
  for (std::size_t left = target_n - assigned; left > 0; --left) {
    std::size_t best = 0;
    std::size_t best_remaining = 0;
    for (std::size_t c = 0; c < cluster_sizes.size(); ++c) {
      const std::size_t remaining = cluster_sizes[c] - quotas[c];
      if (remaining > best_remaining) {
        best_remaining = remaining;
        best = c;
      }
    }
    ++quotas[best];
  }
  return quotas;
}

std::vector<std::size_t> stratified_sample(std::span<const int> clusters, int k, std::size_t target_n,
                                           std::uint64_t seed) {
  if (k < 1) fail(ErrorCode::kInvalidArgument, "k must be positive");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i] < 0 || clusters[i] >= k) {
      fail(ErrorCode::kOutOfRange, "cluster label " + std::to_string(clusters[i]) + " outside [0, k)");
    }
    members[clusters[i]].push_back(i);
  }
  std::vector<std::size_t> sizes;
  for (const auto& m : members) sizes.push_back(m.size());
  const auto quotas = stratified_quotas(sizes, target_n);

  std::vector<std::size_t> selected;
  selected.reserve(target_n);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto pool = members[c];
    std::mt19937_64 rng(mix_seed(seed, c));
    shuffle(pool, rng);
    selected.insert(selected.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quotas[c]));
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::vector<Split> make_splits(std::span<const int> categories, const SplitRatios& ratios,
                               std::uint64_t seed) {
  const std::array<double, 3> r = {ratios.train, ratios.validation, ratios.test};
  const double total = r[0] + r[1] + r[2];
  if (std::any_of(r.begin(), r.end(), [](double v) { return v < 0.0 || !std::isfinite(v); }) ||
      std::abs(total - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument, "split ratios must be non-negative and sum to 1");
  }
  constexpr std::array<Split, 3> kOrder = {Split::kTrain, Split::kValidation, Split::kTest};

  std::map<int, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < categories.size(); ++i) by_category[categories[i]].push_back(i);

  std::vector<Split> out(categories.size(), Split::kTest);
  for (auto& [category, items] : by_category) {
    const std::size_t n = items.size();
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainders{};
    std::size_t used = 0;
    for (int s = 0; s < 3; ++s) {
      const double exact = static_cast<double>(n) * r[s];
      counts[s] = static_cast<std::size_t>(std::floor(exact));
      remainders[s] = exact - static_cast<double>(counts[s]);
      used += counts[s];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (std::size_t i = 0; used < n; ++i, ++used) ++counts[order[i % 3]];

    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(category) + 1000));
    shuffle(items, rng);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t c = 0; c < counts[s]; ++c) out[items[pos++]] = kOrder[s];
    }
  }
  return out;
}

Raster build_masked_person(const Raster& gt_image, const BinaryMask& gt_mask) {
  if (gt_image.width != gt_mask.width() || gt_image.height != gt_mask.height()) {
    fail(ErrorCode::kDimensionMismatch, "image and mask sizes differ");
  }
  Raster out = gt_image;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      if (!gt_mask.at(x, y)) continue;
      for (int c = 0; c < out.channels; ++c) out.at(x, y, c) = 0;
    }
  }
  return out;
}

}  // namespace vton::curation
