#include "vton/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vton/core/error.hpp"

namespace vton {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported_version";
    case ErrorCode::kUnknownDtype: return "unknown_dtype";
    case ErrorCode::kPayloadMismatch: return "payload_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kNotPositiveSemidefinite: return "not_psd";
    case ErrorCode::kUndefinedCorrelation: return "undefined_correlation";
    case ErrorCode::kMalformedResponse: return "malformed_response";
    case ErrorCode::kMissingField: return "missing_field";
    case ErrorCode::kScoreOutOfRange: return "score_out_of_range";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kAuth: return "auth";
    case ErrorCode::kExhausted: return "exhausted";
    case ErrorCode::kUnknownAssignment: return "unknown_assignment";
    case ErrorCode::kExpiredAssignment: return "expired_assignment";
    case ErrorCode::kDoubleSubmission: return "double_submission";
    case ErrorCode::kNotOwner: return "not_owner";
    case ErrorCode::kNoRemainingItems: return "no_remaining_items";
    case ErrorCode::kNoResults: return "no_results";
  }
  return "unknown";
}

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "test";
}

Split split_from_string(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "validation") return Split::kValidation;
  if (text == "test") return Split::kTest;
  fail(ErrorCode::kParse, "unknown split '" + text + "'");
}

std::size_t TensorBlob::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t acc, std::uint32_t d) { return acc * d; });
}

void TensorBlob::validate() const {
  if (data.size() != element_count()) {
    fail(ErrorCode::kPayloadMismatch,
         "tensor payload has " + std::to_string(data.size()) +
             " values, shape implies " + std::to_string(element_count()));
  }
  for (float v : data) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "tensor payload is not finite");
  }
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {
  if (width < 0 || height < 0) fail(ErrorCode::kInvalidArgument, "negative mask size");
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 0 || height < 0 ||
      bits_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCode::kInvalidArgument, "mask bits do not match width x height");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

bool BinaryMask::empty_region() const {
  return std::none_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
  if (width_ != other.width_ || height_ != other.height_) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out(width_, height_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] ? 0 : 1;
  return out;
}

Raster::Raster(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(w) * h * c, fill) {}

std::string EmbeddingVariant::name() const {
  return full_image ? std::string("full_image")
                    : "masked_level_" + std::to_string(level);
}

EmbeddingVariant EmbeddingVariant::parse(const std::string& name) {
  if (name == "full_image") return full();
  const std::string prefix = "masked_level_";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size()) {
    const auto digits = name.substr(prefix.size());
    if (std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      return masked(std::stoi(digits));
    }
  }
  fail(ErrorCode::kParse, "unknown embedding variant '" + name + "'");
}

double Embedding::norm() const {
  double sum = 0.0;
  for (double v : vector) sum += v * v;
  return std::sqrt(sum);
}

VlmScoreVector VlmScoreVector::make(const std::array<double, kVlmDimensions>& scores,
                                    std::array<std::string, 4> reasoning,
                                    std::optional<double> reported_final) {
  VlmScoreVector out;
  double sum = 0.0;
  for (int i = 0; i < kVlmDimensions; ++i) {
    const double s = scores[i];
    if (!std::isfinite(s) || s < 1.0 || s > 5.0) {
      fail(ErrorCode::kScoreOutOfRange,
           std::string(kDimensionNames[i]) + " = " + std::to_string(s) +
               " is outside [1, 5]");
    }
    sum += s;
  }
  if (reported_final && (!std::isfinite(*reported_final) || *reported_final < 1.0 ||
                         *reported_final > 5.0)) {
    fail(ErrorCode::kScoreOutOfRange, "final_weighted_score is outside [1, 5]");
  }
  out.scores_ = scores;
  out.s_avg_ = sum / kVlmDimensions;
  out.reasoning_ = std::move(reasoning);
  out.reported_final_ = reported_final;
  return out;
}

void HumanRating::validate() const {
  for (int s : scores) {
    if (s < 1 || s > 5) {
      fail(ErrorCode::kOutOfRange, "human rating score " + std::to_string(s) +
                                       " is not in 1..5");
    }
  }
}

}  // namespace vton
