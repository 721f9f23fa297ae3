#include <algorithm>
#include <cctype>

#include "prompt_assets.hpp"
#include "vton/core/jsonl.hpp"
#include "vton/vlm/client.hpp"

namespace vton::vlm {

PromptPair build_judge_prompt() {
  return {std::string(assets::kJudgeSystem), std::string(assets::kJudgeUser)};
}

std::string prompt_asset_hash() {
  std::string all;
  for (auto part : {assets::kJudgeSystem, assets::kJudgeUser, assets::kCaptionUpperSystem,
                    assets::kCaptionUpperUser, assets::kCaptionLowerSystem,
                    assets::kCaptionLowerUser, assets::kClassifyGarment}) {
    all.append(part);
    all.push_back('\0');
  }
  return sha256_hex(all);
}

std::string to_string(GarmentCategory category) {
  return category == GarmentCategory::kUpperBody ? "upper_body" : "lower_body";
}

PromptPair build_caption_prompt(GarmentCategory category) {
  if (category == GarmentCategory::kUpperBody) {
    return {std::string(assets::kCaptionUpperSystem), std::string(assets::kCaptionUpperUser)};
  }
  return {std::string(assets::kCaptionLowerSystem), std::string(assets::kCaptionLowerUser)};
}

std::string classify_garment_prompt() { return std::string(assets::kClassifyGarment); }

GarmentCategory parse_garment_category(std::string_view answer) {
  std::string lower(answer);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const bool upper = lower.find("upper") != std::string::npos;
  const bool bottom = lower.find("lower") != std::string::npos;
  if (upper == bottom) {
    fail(ErrorCode::kMalformedResponse, "cannot read an upper/lower decision from '" +
                                            std::string(answer.substr(0, 80)) + "'");
  }
  return upper ? GarmentCategory::kUpperBody : GarmentCategory::kLowerBody;
}

}  // namespace vton::vlm
