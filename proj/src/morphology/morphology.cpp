#include "vton/morphology.hpp"

#include <algorithm>

#include "vton/core/error.hpp"

namespace vton::morphology {

StructuringElement StructuringElement::square(int size) {
  return StructuringElement(size, size,
                            std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size, 1));
}

StructuringElement::StructuringElement(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width <= 0 || height <= 0 || width % 2 == 0 || height % 2 == 0) {
    fail(ErrorCode::kInvalidArgument, "structuring element sides must be odd and positive");
  }
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCode::kInvalidArgument, "structuring element bits do not match its size");
  }
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      auto& b = bits_[static_cast<std::size_t>(y) * width_ + x];
      b = b ? 1 : 0;
      if (b) offsets_.emplace_back(x - width_ / 2, y - height_ / 2);
    }
  }
  if (offsets_.empty()) fail(ErrorCode::kInvalidArgument, "structuring element has no true bit");
}

StructuringElement StructuringElement::mirrored() const {
  std::vector<std::uint8_t> bits(bits_.size());
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      bits[static_cast<std::size_t>(height_ - 1 - y) * width_ + (width_ - 1 - x)] = at(x, y);
    }
  }
  return StructuringElement(width_, height_, std::move(bits));
}

StructuringElement StructuringElement::dilated_by(const StructuringElement& other) const {
  const int w = width_ + other.width_ - 1;
  const int h = height_ + other.height_ - 1;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * h, 0);
  for (auto [ax, ay] : offsets_) {
    for (auto [bx, by] : other.offsets_) {
      bits[static_cast<std::size_t>(ay + by + h / 2) * w + (ax + bx + w / 2)] = 1;
    }
  }
  return StructuringElement(w, h, std::move(bits));
}

StructuringElement StructuringElement::self_dilated(int times) const {
  if (times < 0) fail(ErrorCode::kInvalidArgument, "negative dilation count");
  StructuringElement out(1, 1, {1});
  for (int i = 0; i < times; ++i) out = out.dilated_by(*this);
  return out;
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& elem) {
  BinaryMask out(mask.width(), mask.height());
  const auto& offsets = elem.offsets();
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const bool fits = std::all_of(offsets.begin(), offsets.end(), [&](const auto& o) {
        return mask.at_or_background(x + o.first, y + o.second);
      });
      out.set(x, y, fits);
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& elem) {
  BinaryMask out(mask.width(), mask.height());
  const auto& offsets = elem.offsets();
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (auto [dx, dy] : offsets) {
        const int tx = x + dx;
        const int ty = y + dy;
        if (tx >= 0 && ty >= 0 && tx < mask.width() && ty < mask.height()) out.set(tx, ty, true);
      }
    }
  }
  return out;
}

ErosionHierarchy erosion_hierarchy(const BinaryMask& mask, const StructuringElement& elem,
                                   int levels) {
  if (levels < 1) fail(ErrorCode::kInvalidArgument, "erosion hierarchy needs at least one level");
  ErosionHierarchy h;
  h.levels.reserve(levels);
  h.levels.push_back(mask);
  for (int k = 1; k < levels; ++k) h.levels.push_back(erode(h.levels.back(), elem));
  for (const auto& level : h.levels) h.degenerate.push_back(level.empty_region());
  return h;
}

}  // namespace vton::morphology
