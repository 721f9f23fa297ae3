#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "vton/core/jsonl.hpp"
#include "vton/core/types.hpp"

namespace vton::study {

/// One (triplet, method) item with the URLs of the images shown to raters.
struct StudyItem {
  std::string triplet_id;
  std::string method_id;
  std::string garment_url;
  std::string ground_truth_url;
  std::string generated_url;
};

enum class AssignmentState { kPending, kRated, kExpired };
std::string to_string(AssignmentState state);

struct Assignment {
  std::string assignment_id;
  std::string rater_id;
  std::string triplet_id;
  std::string method_id;
  Clock::time_point issued_at{};
  AssignmentState state = AssignmentState::kPending;
};

struct DimensionInfo {
  const char* key;
  const char* title;
  const char* definition;
};

/// The five rubric dimensions shown next to every task.
const std::array<DimensionInfo, kVlmDimensions>& dimensions();

struct ItemProgress {
  std::string triplet_id;
  std::string method_id;
  std::size_t ratings = 0;
  std::size_t pending = 0;
};

struct Progress {
  std::vector<ItemProgress> items;
  std::size_t total_ratings = 0;
  std::size_t min_ratings = 0;
  std::size_t complete_items = 0;  // items with at least 2 ratings
};

struct StudyOptions {
  std::uint64_t seed = 0;
  std::chrono::minutes expiry{30};
  std::filesystem::path log_path;  // empty: in-memory only
  std::function<Clock::time_point()> now = [] { return Clock::now(); };
};

/// Assignment and rating bookkeeping. All state changes go through one mutex
/// and, when a log path is set, are appended to the log before returning; an
/// existing log is replayed on construction.
class Study {
 public:
  Study(std::vector<StudyItem> items, StudyOptions options);

  /// Coverage-first: among items this rater has never been given, picks one
  /// with the fewest ratings plus in-flight assignments, uniformly at random
  /// among ties. A rater with a live pending assignment gets it back.
  /// Throws kNoRemainingItems when nothing is left for this rater.
  Assignment next_assignment(const std::string& rater_id);

  /// Throws kUnknownAssignment, kNotOwner, kExpiredAssignment,
  /// kDoubleSubmission or kOutOfRange.
  HumanRating submit_rating(const std::string& assignment_id, const std::string& rater_id,
                            const std::array<int, kVlmDimensions>& scores);

  std::vector<HumanRating> export_ratings() const;
  Progress progress() const;
  const StudyItem& item(const std::string& triplet_id, const std::string& method_id) const;

 private:
  using Key = std::pair<std::string, std::string>;
  void expire_stale(Clock::time_point now);
  void apply_assign(const Assignment& a);
  void apply_rating(const std::string& assignment_id, const HumanRating& r);
  void replay();

  mutable std::mutex mutex_;
  std::vector<StudyItem> items_;
  std::map<Key, std::size_t> index_;
  StudyOptions options_;
  std::mt19937_64 rng_;
  std::map<std::string, Assignment> assignments_;
  std::map<std::string, std::set<Key>> given_;  // rater -> items ever issued
  std::map<Key, std::size_t> rating_counts_;
  std::vector<HumanRating> ratings_;
  std::size_t next_id_ = 1;
  std::unique_ptr<JsonlAppender> log_;
};

/// HTTP surface: GET /api/task?rater=, POST /api/rating, GET /api/progress,
/// GET /api/export, /images/* from image_root and the UI bundle at /.
class StudyServer {
 public:
  StudyServer(Study& study, std::filesystem::path image_root, std::filesystem::path ui_root = {});
  ~StudyServer();

  /// Binds and serves on a background thread; port 0 picks a free port.
  int start(const std::string& host, int port);
  /// Blocks in the calling thread.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vton::study
