#pragma once

#include <vector>

#include "vton/core/types.hpp"

namespace vton::morphology {

/// Binary structuring element with its origin at the center. Width and height
/// are odd and at least one bit is set.
class StructuringElement {
 public:
  /// The w x h all-true rectangle; square(3) is the default element B.
  static StructuringElement square(int size = 3);
  StructuringElement(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  bool contains_origin() const { return at(width_ / 2, height_ / 2); }

  /// Offsets (dx, dy) of the true bits relative to the origin.
  const std::vector<std::pair<int, int>>& offsets() const { return offsets_; }

  /// Point reflection through the origin.
  StructuringElement mirrored() const;
  /// Minkowski sum of two elements (this ⊕ other).
  StructuringElement dilated_by(const StructuringElement& other) const;
  /// B ⊕ B ⊕ ... ⊕ B with `times` copies; times = 0 gives the single origin.
  StructuringElement self_dilated(int times) const;

  bool operator==(const StructuringElement& o) const {
    return width_ == o.width_ && height_ == o.height_ && bits_ == o.bits_;
  }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
  std::vector<std::pair<int, int>> offsets_;
};

/// Output pixel is foreground iff the translated element fits inside the
/// foreground. Pixels outside the image are background.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& elem);

/// Minkowski dilation with the element's centered origin.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& elem);

struct ErosionHierarchy {
  std::vector<BinaryMask> levels;   // M^(0) .. M^(K-1)
  std::vector<bool> degenerate;     // level became empty
};

/// M^(0) = mask, M^(k) = erode(M^(k-1), elem).
ErosionHierarchy erosion_hierarchy(const BinaryMask& mask, const StructuringElement& elem,
                                   int levels = 4);

}  // namespace vton::morphology
