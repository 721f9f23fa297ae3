#include "vton/core/manifest.hpp"

#include <set>
#include <unordered_set>

#include "vton/core/error.hpp"
#include "vton/core/image_io.hpp"
#include "vton/core/jsonl.hpp"

namespace vton {

using nlohmann::json;

json to_json(const TripletRecord& r) {
  return json{{"id", r.id},
              {"garment_path", r.garment_path},
              {"ground_truth_path", r.ground_truth_path},
              {"masked_person_path", r.masked_person_path},
              {"gt_mask_path", r.gt_mask_path},
              {"caption", r.caption},
              {"category_id", r.category_id},
              {"split", to_string(r.split)},
              {"verified", r.verified},
              {"caption_failed", r.caption_failed}};
}

TripletRecord triplet_from_json(const json& j) {
  TripletRecord r;
  r.id = j.at("id").get<std::string>();
  r.garment_path = j.at("garment_path").get<std::string>();
  r.ground_truth_path = j.at("ground_truth_path").get<std::string>();
  r.masked_person_path = j.value("masked_person_path", std::string{});
  r.gt_mask_path = j.at("gt_mask_path").get<std::string>();
  r.caption = j.value("caption", std::string{});
  r.category_id = j.value("category_id", 0);
  r.split = split_from_string(j.value("split", std::string("test")));
  r.verified = j.value("verified", false);
  r.caption_failed = j.value("caption_failed", false);
  if (r.id.empty()) fail(ErrorCode::kParse, "empty triplet id");
  if (r.category_id < 0 || r.category_id >= kNumCategories) {
    fail(ErrorCode::kOutOfRange, "category_id " + std::to_string(r.category_id) +
                                     " of '" + r.id + "' is outside [0, 19]");
  }
  return r;
}

json to_json(const GeneratedResult& g) {
  json j{{"triplet_id", g.triplet_id}, {"method_id", g.method_id}, {"image_path", g.image_path}};
  if (g.gen_mask_path) j["gen_mask_path"] = *g.gen_mask_path;
  return j;
}

GeneratedResult result_from_json(const json& j) {
  GeneratedResult g;
  g.triplet_id = j.at("triplet_id").get<std::string>();
  g.method_id = j.at("method_id").get<std::string>();
  g.image_path = j.at("image_path").get<std::string>();
  if (j.contains("gen_mask_path") && !j["gen_mask_path"].is_null()) {
    g.gen_mask_path = j["gen_mask_path"].get<std::string>();
  }
  return g;
}

json to_json(const HumanRating& r) {
  return json{{"triplet_id", r.triplet_id},
              {"method_id", r.method_id},
              {"rater_id", r.rater_id},
              {"scores", r.scores},
              {"timestamp", format_utc(r.timestamp)}};
}

HumanRating rating_from_json(const json& j) {
  HumanRating r;
  r.triplet_id = j.at("triplet_id").get<std::string>();
  r.method_id = j.at("method_id").get<std::string>();
  r.rater_id = j.at("rater_id").get<std::string>();
  const auto& scores = j.at("scores");
  if (!scores.is_array() || scores.size() != kVlmDimensions) {
    fail(ErrorCode::kParse, "human rating needs exactly five scores");
  }
  for (int i = 0; i < kVlmDimensions; ++i) {
    if (!scores[i].is_number_integer()) fail(ErrorCode::kParse, "human scores must be integers");
    r.scores[i] = scores[i].get<int>();
  }
  r.timestamp = j.contains("timestamp") ? parse_utc(j["timestamp"].get<std::string>())
                                        : Clock::time_point{};
  r.validate();
  return r;
}

std::vector<TripletRecord> load_manifest(const std::filesystem::path& path) {
  std::vector<TripletRecord> records;
  std::unordered_set<std::string> seen;
  read_jsonl(path, [&](const json& row, std::size_t line) {
    auto record = triplet_from_json(row);
    if (!seen.insert(record.id).second) {
      fail(ErrorCode::kDuplicateId, path.filename().string() + ":" + std::to_string(line) +
                                        ": duplicate id '" + record.id + "'");
    }
    records.push_back(std::move(record));
  });
  return records;
}

void save_manifest(const std::vector<TripletRecord>& records, const std::filesystem::path& path) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  write_jsonl(path, rows);
}

std::vector<GeneratedResult> load_results(const std::filesystem::path& path) {
  std::vector<GeneratedResult> results;
  std::set<std::pair<std::string, std::string>> seen;
  read_jsonl(path, [&](const json& row, std::size_t line) {
    auto result = result_from_json(row);
    if (!seen.emplace(result.triplet_id, result.method_id).second) {
      fail(ErrorCode::kDuplicateId, path.filename().string() + ":" + std::to_string(line) +
                                        ": duplicate (" + result.triplet_id + ", " +
                                        result.method_id + ")");
    }
    results.push_back(std::move(result));
  });
  return results;
}

void save_results(const std::vector<GeneratedResult>& results, const std::filesystem::path& path) {
  std::vector<json> rows;
  for (const auto& r : results) rows.push_back(to_json(r));
  write_jsonl(path, rows);
}

std::vector<HumanRating> load_ratings(const std::filesystem::path& path) {
  std::vector<HumanRating> ratings;
  read_jsonl(path, [&](const json& row, std::size_t) { ratings.push_back(rating_from_json(row)); });
  return ratings;
}

void save_ratings(const std::vector<HumanRating>& ratings, const std::filesystem::path& path) {
  std::vector<json> rows;
  for (const auto& r : ratings) rows.push_back(to_json(r));
  write_jsonl(path, rows);
}

std::filesystem::path resolve_path(const std::filesystem::path& manifest, const std::string& entry) {
  std::filesystem::path p(entry);
  if (p.is_absolute()) return p;
  return manifest.parent_path() / p;
}

void check_resolved(const TripletRecord& record, const std::filesystem::path& manifest) {
  for (const auto* entry : {&record.garment_path, &record.ground_truth_path,
                            &record.masked_person_path, &record.gt_mask_path}) {
    if (entry->empty()) continue;
    const auto path = resolve_path(manifest, *entry);
    if (!std::filesystem::exists(path)) {
      fail(ErrorCode::kNotFound, "triplet '" + record.id + "': missing file " + path.string());
    }
    image_size(path);
  }
}

}  // namespace vton
