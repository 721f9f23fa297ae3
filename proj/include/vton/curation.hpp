#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vton/core/types.hpp"

namespace vton::curation {

inline constexpr int kMinSide = 1024;
inline constexpr int kMaxSide = 1536;
inline constexpr int kDefaultClusters = 20;

/// Accepts iff min(w, h) >= 1024 and max(w, h) <= 1536.
bool resolution_filter(int width, int height);

struct KMeansOptions {
  int k = kDefaultClusters;
  std::uint64_t seed = 0;
  int max_iterations = 300;
  double tolerance = 1e-6;  // largest centroid movement that stops iteration
};

struct ClusterAssignment {
  std::size_t index = 0;
  int cluster = 0;
  double distance = 0.0;  // Euclidean distance to the final centroid
};

struct KMeansResult {
  std::vector<ClusterAssignment> assignments;
  std::vector<std::vector<double>> centroids;
  std::vector<double> inertia_history;  // after each Lloyd assignment step
  int iterations = 0;
  double inertia = 0.0;
};

/// k-means++ seeding followed by Lloyd iterations. Deterministic for a seed.
KMeansResult kmeans_cluster(std::span<const std::vector<double>> points, const KMeansOptions& options);

/// Balanced selection of exactly target_n indices. Each cluster gets
/// floor(target_n / k); clusters smaller than that contribute everything and
/// the shortfall goes round-robin, one item at a time, to the clusters with
/// the most remaining items. Returns indices sorted ascending.
std::vector<std::size_t> stratified_sample(std::span<const int> clusters, int k,
                                           std::size_t target_n, std::uint64_t seed);

/// Per-cluster quotas used by stratified_sample (exposed for reporting).
std::vector<std::size_t> stratified_quotas(std::span<const std::size_t> cluster_sizes,
                                           std::size_t target_n);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

/// Stratified per category: each category is shuffled and cut by the ratios
/// using largest-remainder rounding.
std::vector<Split> make_splits(std::span<const int> categories, const SplitRatios& ratios,
                               std::uint64_t seed);

/// I_m: pixels inside the mask become black, everything else is untouched.
Raster build_masked_person(const Raster& gt_image, const BinaryMask& gt_mask);

}  // namespace vton::curation
