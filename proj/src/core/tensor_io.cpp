#include "vton/core/tensor_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "vton/core/error.hpp"

namespace vton {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'V', 'T', 'E', 'N'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail(ErrorCode::kPayloadMismatch, "truncated tensor header");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensor(const TensorBlob& blob) {
  blob.validate();
  if (blob.shape.size() > 255) fail(ErrorCode::kInvalidArgument, "tensor has more than 255 dims");
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.reserve(8 + 4 * blob.shape.size() + 4 * blob.data.size());
  put_u16(out, kTensorVersion);
  out.push_back(kDtypeF32);
  out.push_back(static_cast<std::uint8_t>(blob.shape.size()));
  for (auto d : blob.shape) put_u32(out, d);
  for (float v : blob.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

TensorBlob decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    fail(ErrorCode::kBadMagic, "not a .vten file (bad magic)");
  }
  Reader in(bytes.subspan(4));
  const auto version = in.u16();
  if (version != kTensorVersion) {
    fail(ErrorCode::kUnsupportedVersion, "unsupported .vten version " + std::to_string(version));
  }
  const auto dtype = in.u8();
  if (dtype != kDtypeF32) {
    fail(ErrorCode::kUnknownDtype, "unknown .vten dtype code " + std::to_string(dtype));
  }
  TensorBlob blob;
  const auto ndim = in.u8();
  blob.shape.reserve(ndim);
  for (int i = 0; i < ndim; ++i) blob.shape.push_back(in.u32());
  const std::size_t count = blob.element_count();
  if (in.remaining() != count * 4) {
    fail(ErrorCode::kPayloadMismatch,
         "payload has " + std::to_string(in.remaining()) + " bytes, shape needs " +
             std::to_string(count * 4));
  }
  blob.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) blob.data[i] = std::bit_cast<float>(in.u32());
  blob.validate();
  return blob;
}

void write_tensor(const TensorBlob& blob, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(blob);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

TensorBlob read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "cannot open tensor " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

}  // namespace vton
