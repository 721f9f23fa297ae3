#pragma once

#include <filesystem>

#include "vton/core/types.hpp"

namespace vton {

/// Decodes to 3-channel RGB regardless of the file's channel count.
Raster load_image(const std::filesystem::path& path);
void save_image(const Raster& image, const std::filesystem::path& path);

/// 8-bit single channel; pixel > 127 is foreground.
BinaryMask load_mask(const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Reads width/height from the file header without full validation.
std::pair<int, int> image_size(const std::filesystem::path& path);

/// Î ⊙ M: pixels outside the mask are zeroed, no cropping.
Raster multiply_by_mask(const Raster& image, const BinaryMask& mask);

}  // namespace vton
