#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vton {

enum class Split { kTrain, kValidation, kTest };

std::string to_string(Split split);
Split split_from_string(const std::string& text);

/// One evaluation case: garment I_g, ground truth I_gt, masked person I_m and
/// the ground-truth garment mask. Paths are stored as written in the manifest.
struct TripletRecord {
  std::string id;
  std::string garment_path;
  std::string ground_truth_path;
  std::string masked_person_path;
  std::string gt_mask_path;
  std::string caption;
  int category_id = 0;
  Split split = Split::kTest;
  // Set by external human pair review; carried through untouched.
  bool verified = false;
  bool caption_failed = false;

  bool operator==(const TripletRecord&) const = default;
};

inline constexpr int kNumCategories = 20;

/// A generator output Î for one triplet. The generator itself is external.
struct GeneratedResult {
  std::string triplet_id;
  std::string method_id;
  std::string image_path;
  std::optional<std::string> gen_mask_path;

  bool operator==(const GeneratedResult&) const = default;
};

/// Row-major f32 tensor used for every file-based feature exchange.
struct TensorBlob {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
  /// Throws kPayloadMismatch / kNonFinite.
  void validate() const;

  bool operator==(const TensorBlob&) const = default;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty_region() const;
  std::size_t count() const;

  bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool value) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }
  // Out-of-image pixels read as background.
  bool at_or_background(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
  }

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Every foreground pixel of *this is foreground in other.
  bool subset_of(const BinaryMask& other) const;
  BinaryMask complement() const;

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Interleaved 8-bit raster, channels in {1, 3}. RGB order when 3.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(int w, int h, int c = 3, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_shape(const Raster& other) const {
    return width == other.width && height == other.height &&
           channels == other.channels;
  }

  bool operator==(const Raster&) const = default;
};

/// Which input produced an embedding: the whole image or the image masked at
/// erosion level k.
struct EmbeddingVariant {
  bool full_image = true;
  int level = 0;

  static EmbeddingVariant full() { return {true, 0}; }
  static EmbeddingVariant masked(int k) { return {false, k}; }

  /// "full_image" or "masked_level_<k>".
  std::string name() const;
  static EmbeddingVariant parse(const std::string& name);

  bool operator==(const EmbeddingVariant&) const = default;
};

struct Embedding {
  std::vector<double> vector;
  std::string backend_id;
  std::string source_id;
  EmbeddingVariant variant;
  // The masked region was empty, so the vector carries no information.
  bool degenerate = false;

  double norm() const;
};

inline constexpr int kVlmDimensions = 5;

/// Five semantic scores plus their unweighted mean. Constructed only through
/// make(), which enforces the [1, 5] range.
class VlmScoreVector {
 public:
  static VlmScoreVector make(const std::array<double, kVlmDimensions>& scores,
                             std::array<std::string, 4> reasoning = {},
                             std::optional<double> reported_final = {});

  double s_bg() const { return scores_[0]; }
  double s_id() const { return scores_[1]; }
  double s_tex() const { return scores_[2]; }
  double s_shape() const { return scores_[3]; }
  double s_real() const { return scores_[4]; }
  double s_avg() const { return s_avg_; }
  const std::array<double, kVlmDimensions>& scores() const { return scores_; }
  const std::array<std::string, 4>& reasoning() const { return reasoning_; }
  /// The judge's own final_weighted_score, recorded but never used in means.
  std::optional<double> reported_final() const { return reported_final_; }

 private:
  VlmScoreVector() = default;
  std::array<double, kVlmDimensions> scores_{};
  double s_avg_ = 0.0;
  std::array<std::string, 4> reasoning_;
  std::optional<double> reported_final_;
};

/// Representation scores for one pair or one method. Levels that were
/// degenerate (empty eroded region) are nullopt and excluded from means.
struct RepScoreSet {
  double s_global = 0.0;
  std::vector<std::optional<double>> s_rep;
  std::optional<double> s_rep_mean;
  std::optional<double> s_overall;
};

/// Unbounded PSNR for identical images is represented by nullopt.
struct PixelScoreSet {
  std::optional<double> psnr;
  double ssim = 0.0;
  std::optional<double> lpips;
};

using Clock = std::chrono::system_clock;

struct HumanRating {
  std::string triplet_id;
  std::string method_id;
  std::string rater_id;
  std::array<int, kVlmDimensions> scores{};
  Clock::time_point timestamp{};

  void validate() const;
};

inline constexpr std::array<const char*, kVlmDimensions> kDimensionNames = {
    "s_bg", "s_id", "s_tex", "s_shape", "s_real"};

struct MethodAggregate {
  std::string method_id;
  std::optional<std::array<double, kVlmDimensions + 1>> vlm;  // + s_avg
  std::optional<RepScoreSet> rep;
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<double> lpips;
  std::optional<double> fid;
  std::optional<std::array<double, kVlmDimensions + 1>> human;  // + s_avg
  std::size_t sample_count = 0;
};

struct CorrelationRow {
  std::string metric;
  double rho_s = 0.0;
  double rho_k = 0.0;
  double rho_p = 0.0;
  std::size_t n = 0;
};

struct CorrelationReport {
  std::string human_column;
  std::vector<CorrelationRow> rows;
};

}  // namespace vton
