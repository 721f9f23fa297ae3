#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "vton/core/jsonl.hpp"
#include "vton/core/types.hpp"

namespace vton::cli {

/// One metric value for one (triplet, method). Method-level metrics (FID)
/// use triplet_id "*". A null value carries a flag naming why.
struct ScoreRecord {
  std::string triplet_id;
  std::string method_id;
  std::string metric;
  std::optional<double> value;
  std::string flag;  // "", "degenerate", "inf", "failed:<code>"

  bool operator==(const ScoreRecord&) const = default;
};

inline constexpr const char* kMethodLevel = "*";

/// Append-only score log at <dir>/scores.jsonl. Reads resolve duplicates
/// last-write-wins per (triplet, method, metric).
class ResultsStore {
 public:
  explicit ResultsStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path scores_path() const { return dir_ / "scores.jsonl"; }
  std::filesystem::path aggregates_path() const { return dir_ / "aggregates.json"; }

  void append(const std::vector<ScoreRecord>& records);
  /// Deduplicated, sorted by (method, triplet, metric).
  std::vector<ScoreRecord> load() const;
  bool has(const std::string& triplet_id, const std::string& method_id,
           const std::string& metric) const;
  /// Latest record for the key, or null.
  const ScoreRecord* find(const std::string& triplet_id, const std::string& method_id,
                          const std::string& metric) const;

 private:
  using Key = std::tuple<std::string, std::string, std::string>;
  void load_index() const;

  std::filesystem::path dir_;
  std::unique_ptr<JsonlAppender> appender_;
  mutable std::optional<std::map<Key, ScoreRecord>> index_;
};

/// Metric names used in the store.
namespace metric {
std::string vlm(int dimension);  // vlm.s_bg ... vlm.s_real
inline constexpr const char* kVlmAvg = "vlm.s_avg";
inline constexpr const char* kVlmReported = "vlm.final_reported";
inline constexpr const char* kVlmFailure = "vlm.failure";  // flag set while the pair is unscored
inline constexpr const char* kVlmAttempts = "vlm.attempts";
inline constexpr const char* kGlobal = "rep.s_global";
std::string rep_level(int k);  // rep.s_rep_<k>
inline constexpr const char* kRepMean = "rep.s_rep_mean";
inline constexpr const char* kRepOverall = "rep.s_overall";
inline constexpr const char* kPsnr = "pixel.psnr";
inline constexpr const char* kSsim = "pixel.ssim";
inline constexpr const char* kLpips = "pixel.lpips";
inline constexpr const char* kFid = "fid";
}  // namespace metric

struct PairRecords {
  std::string triplet_id;
  std::string method_id;
  std::map<std::string, ScoreRecord> metrics;
};

/// Groups per-pair records (method-level ones excluded).
std::vector<PairRecords> group_pairs(const std::vector<ScoreRecord>& records);

struct AggregateBuild {
  std::vector<MethodAggregate> methods;
  std::map<std::string, std::vector<std::size_t>> rep_excluded;  // per method, per level
  std::map<std::string, std::size_t> psnr_infinite;
  std::map<std::string, std::size_t> failures;
  int levels = 0;
};

/// Per-method means of per-pair values, in method-id order.
AggregateBuild build_aggregates(const std::vector<ScoreRecord>& records);

}  // namespace vton::cli
