#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "vton/core/types.hpp"

namespace vton {

nlohmann::json to_json(const TripletRecord& record);
TripletRecord triplet_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GeneratedResult& result);
GeneratedResult result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HumanRating& rating);
HumanRating rating_from_json(const nlohmann::json& j);

/// Line-delimited triplet manifest. Blank lines are skipped. Parse errors
/// carry the 1-based line number; duplicate ids and out-of-range categories
/// are rejected.
std::vector<TripletRecord> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::vector<TripletRecord>& records,
                   const std::filesystem::path& path);

/// (triplet_id, method_id) must be unique.
std::vector<GeneratedResult> load_results(const std::filesystem::path& path);
void save_results(const std::vector<GeneratedResult>& results,
                  const std::filesystem::path& path);

std::vector<HumanRating> load_ratings(const std::filesystem::path& path);
void save_ratings(const std::vector<HumanRating>& ratings,
                  const std::filesystem::path& path);

/// Relative paths in a manifest resolve against the manifest's directory.
std::filesystem::path resolve_path(const std::filesystem::path& manifest,
                                   const std::string& entry);

/// Checks that every referenced file exists and decodes.
void check_resolved(const TripletRecord& record,
                    const std::filesystem::path& manifest);

}  // namespace vton
