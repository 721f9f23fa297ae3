#include <array>

#include <json.hpp>

#include "vton/vlm/client.hpp"

namespace vton::vlm {
namespace {

constexpr std::array<const char*, 4> kReasoningFields = {
    "background_analysis", "person_analysis", "garment_analysis", "realism_analysis"};
constexpr std::array<const char*, kVlmDimensions> kScoreFields = {
    "background_consistency", "person_consistency", "texture_fidelity", "shape_preservation",
    "overall_realism"};

std::string_view strip_fences(std::string_view text) {
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };
  text = trim(text);
  if (text.starts_with("```")) {
    const auto newline = text.find('\n');
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    const auto close = text.rfind("```");
    if (close != std::string_view::npos) text = text.substr(0, close);
    text = trim(text);
  }
  return text;
}

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const char* where) {
  if (!obj.contains(key)) {
    fail(ErrorCode::kMissingField, std::string("missing field '") + where + key + "'");
  }
  return obj[key];
}

double number(const nlohmann::json& value, const std::string& name) {
  if (!value.is_number()) fail(ErrorCode::kMalformedResponse, "'" + name + "' is not a number");
  return value.get<double>();
}

}  // namespace

VlmScoreVector parse_judge_response(std::string_view text) {
  const auto body = strip_fences(text);
  const auto open = body.find('{');
  const auto close = body.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    fail(ErrorCode::kMalformedResponse, "judge response contains no JSON object");
  }
  nlohmann::json doc = nlohmann::json::parse(body.substr(open, close - open + 1), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    fail(ErrorCode::kMalformedResponse, "judge response is not a valid JSON object");
  }

  const auto& reasoning = require(doc, "reasoning", "");
  if (!reasoning.is_object()) fail(ErrorCode::kMalformedResponse, "'reasoning' is not an object");
  std::array<std::string, 4> analyses;
  for (std::size_t i = 0; i < kReasoningFields.size(); ++i) {
    const auto& v = require(reasoning, kReasoningFields[i], "reasoning.");
    if (!v.is_string()) {
      fail(ErrorCode::kMalformedResponse, std::string("'") + kReasoningFields[i] + "' is not a string");
    }
    analyses[i] = v.get<std::string>();
  }

  const auto& scores = require(doc, "scores", "");
  if (!scores.is_object()) fail(ErrorCode::kMalformedResponse, "'scores' is not an object");
  std::array<double, kVlmDimensions> values{};
  for (std::size_t i = 0; i < kScoreFields.size(); ++i) {
    values[i] = number(require(scores, kScoreFields[i], "scores."), kScoreFields[i]);
  }
  const double final_score =
      number(require(doc, "final_weighted_score", ""), "final_weighted_score");

  for (std::size_t i = 0; i < kScoreFields.size(); ++i) {
    if (values[i] < 1.0 || values[i] > 5.0) {
      fail(ErrorCode::kScoreOutOfRange,
           std::string(kScoreFields[i]) + " = " + std::to_string(values[i]) + " is outside [1, 5]");
    }
  }
  return VlmScoreVector::make(values, std::move(analyses), final_score);
}

}  // namespace vton::vlm
