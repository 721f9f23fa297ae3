#pragma once

#include <filesystem>
#include <span>

#include "vton/core/types.hpp"

namespace vton {

// ".vten" layout: "VTEN", u16 LE version (1), u8 dtype (1 = f32), u8 ndim,
// ndim x u32 LE dims, row-major LE f32 payload. No padding.
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;

void write_tensor(const TensorBlob& blob, const std::filesystem::path& path);
TensorBlob read_tensor(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_tensor(const TensorBlob& blob);
TensorBlob decode_tensor(std::span<const std::uint8_t> bytes);

}  // namespace vton
