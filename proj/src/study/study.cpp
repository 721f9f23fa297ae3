#include "vton/study/study.hpp"

#include <algorithm>
#include <limits>

#include "vton/core/error.hpp"
#include "vton/core/manifest.hpp"

namespace vton::study {

using nlohmann::json;

std::string to_string(AssignmentState state) {
  switch (state) {
    case AssignmentState::kPending: return "pending";
    case AssignmentState::kRated: return "rated";
    case AssignmentState::kExpired: return "expired";
  }
  return "pending";
}

const std::array<DimensionInfo, kVlmDimensions>& dimensions() {
  static const std::array<DimensionInfo, kVlmDimensions> kDims = {{
      {"s_bg", "Background Consistency",
       "The background must remain unchanged compared to the ground truth, except where the "
       "clothing covers it."},
      {"s_id", "Person Identity & Body Consistency",
       "Face, skin tone and body structure (limbs, hands) must match the ground truth."},
      {"s_tex", "Texture Fidelity",
       "Logos, prints, fabric material and patterns from the garment image must be rendered "
       "accurately."},
      {"s_shape", "Shape Preservation",
       "Sleeve length, neckline and fit of the garment must be preserved."},
      {"s_real", "Overall Realism",
       "The result should look like a real photograph: natural lighting, shadows and folds."},
  }};
  return kDims;
}

Study::Study(std::vector<StudyItem> items, StudyOptions options)
    : items_(std::move(items)), options_(std::move(options)), rng_(options_.seed) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    Key key{items_[i].triplet_id, items_[i].method_id};
    if (!index_.emplace(key, i).second) {
      fail(ErrorCode::kDuplicateId, "duplicate study item (" + key.first + ", " + key.second + ")");
    }
    rating_counts_[key] = 0;
  }
  if (!options_.log_path.empty()) {
    if (std::filesystem::exists(options_.log_path)) replay();
    log_ = std::make_unique<JsonlAppender>(options_.log_path);
  }
}

void Study::replay() {
  read_jsonl(options_.log_path, [&](const json& row, std::size_t) {
    const auto event = row.at("event").get<std::string>();
    if (event == "assign") {
      Assignment a;
      a.assignment_id = row.at("assignment_id").get<std::string>();
      a.rater_id = row.at("rater_id").get<std::string>();
      a.triplet_id = row.at("triplet_id").get<std::string>();
      a.method_id = row.at("method_id").get<std::string>();
      a.issued_at = parse_utc(row.at("issued_at").get<std::string>());
      apply_assign(a);
    } else if (event == "rating") {
      apply_rating(row.at("assignment_id").get<std::string>(), rating_from_json(row.at("rating")));
    } else {
      fail(ErrorCode::kParse, "unknown study log event '" + event + "'");
    }
  });
  // Ids continue after the highest replayed one.
  for (const auto& [id, a] : assignments_) {
    next_id_ = std::max(next_id_, static_cast<std::size_t>(std::stoull(id.substr(1))) + 1);
  }
}

void Study::apply_assign(const Assignment& a) {
  if (!index_.contains({a.triplet_id, a.method_id})) {
    fail(ErrorCode::kNotFound, "assignment for unknown item (" + a.triplet_id + ", " + a.method_id + ")");
  }
  assignments_[a.assignment_id] = a;
  given_[a.rater_id].insert({a.triplet_id, a.method_id});
}

void Study::apply_rating(const std::string& assignment_id, const HumanRating& r) {
  auto it = assignments_.find(assignment_id);
  if (it == assignments_.end()) fail(ErrorCode::kUnknownAssignment, "unknown assignment " + assignment_id);
  it->second.state = AssignmentState::kRated;
  ++rating_counts_[{r.triplet_id, r.method_id}];
  ratings_.push_back(r);
}

void Study::expire_stale(Clock::time_point now) {
  for (auto& [id, a] : assignments_) {
    if (a.state == AssignmentState::kPending && now - a.issued_at >= options_.expiry) {
      a.state = AssignmentState::kExpired;
    }
  }
}

Assignment Study::next_assignment(const std::string& rater_id) {
  if (rater_id.empty()) fail(ErrorCode::kInvalidArgument, "rater token is empty");
  std::lock_guard lock(mutex_);
  const auto now = options_.now();
  expire_stale(now);

  std::map<Key, std::size_t> pending;
  for (const auto& [id, a] : assignments_) {
    if (a.state != AssignmentState::kPending) continue;
    if (a.rater_id == rater_id) return a;
    ++pending[{a.triplet_id, a.method_id}];
  }

  const auto& given = given_[rater_id];
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    Key key{items_[i].triplet_id, items_[i].method_id};
    if (given.contains(key)) continue;
    const std::size_t load = rating_counts_[key] + pending[key];
    if (load < best) {
      best = load;
      candidates.clear();
    }
    if (load == best) candidates.push_back(i);
  }
  if (candidates.empty()) {
    fail(ErrorCode::kNoRemainingItems, "no remaining items for rater " + rater_id);
  }
  const auto& item = items_[candidates[rng_() % candidates.size()]];

  Assignment a;
  a.assignment_id = "a" + std::to_string(next_id_++);
  a.rater_id = rater_id;
  a.triplet_id = item.triplet_id;
  a.method_id = item.method_id;
  a.issued_at = now;
  if (log_) {
    log_->append({{"event", "assign"},
                  {"assignment_id", a.assignment_id},
                  {"rater_id", a.rater_id},
                  {"triplet_id", a.triplet_id},
                  {"method_id", a.method_id},
                  {"issued_at", format_utc(a.issued_at)}});
  }
  apply_assign(a);
  return a;
}

HumanRating Study::submit_rating(const std::string& assignment_id, const std::string& rater_id,
                                 const std::array<int, kVlmDimensions>& scores) {
  std::lock_guard lock(mutex_);
  const auto now = options_.now();
  expire_stale(now);
  auto it = assignments_.find(assignment_id);
  if (it == assignments_.end()) fail(ErrorCode::kUnknownAssignment, "unknown assignment " + assignment_id);
  const auto& a = it->second;
  if (a.rater_id != rater_id) fail(ErrorCode::kNotOwner, "assignment belongs to another rater");
  if (a.state == AssignmentState::kRated) fail(ErrorCode::kDoubleSubmission, "assignment already rated");
  if (a.state == AssignmentState::kExpired) fail(ErrorCode::kExpiredAssignment, "assignment expired");

  HumanRating r;
  r.triplet_id = a.triplet_id;
  r.method_id = a.method_id;
  r.rater_id = rater_id;
  r.scores = scores;
  r.timestamp = now;
  r.validate();
  if (log_) {
    log_->append({{"event", "rating"}, {"assignment_id", assignment_id}, {"rating", to_json(r)}});
  }
  apply_rating(assignment_id, r);
  return r;
}

std::vector<HumanRating> Study::export_ratings() const {
  std::lock_guard lock(mutex_);
  return ratings_;
}

Progress Study::progress() const {
  std::lock_guard lock(mutex_);
  Progress p;
  p.min_ratings = items_.empty() ? 0 : std::numeric_limits<std::size_t>::max();
  for (const auto& item : items_) {
    ItemProgress ip{item.triplet_id, item.method_id, rating_counts_.at({item.triplet_id, item.method_id}), 0};
    for (const auto& [id, a] : assignments_) {
      if (a.state == AssignmentState::kPending && a.triplet_id == item.triplet_id &&
          a.method_id == item.method_id) {
        ++ip.pending;
      }
    }
    p.total_ratings += ip.ratings;
    p.min_ratings = std::min(p.min_ratings, ip.ratings);
    if (ip.ratings >= 2) ++p.complete_items;
    p.items.push_back(std::move(ip));
  }
  return p;
}

const StudyItem& Study::item(const std::string& triplet_id, const std::string& method_id) const {
  auto it = index_.find({triplet_id, method_id});
  if (it == index_.end()) fail(ErrorCode::kNotFound, "unknown study item");
  return items_[it->second];
}

}  // namespace vton::study
