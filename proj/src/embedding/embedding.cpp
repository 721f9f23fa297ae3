#include "vton/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "vton/core/error.hpp"
#include "vton/core/tensor_io.hpp"

namespace vton::embedding {

Embedding embed_builtin(const Raster& image, std::string source_id, EmbeddingVariant variant) {
  if (image.width <= 0 || image.height <= 0) {
    fail(ErrorCode::kInvalidArgument, "cannot embed a zero-area image");
  }
  if (image.channels != 3) fail(ErrorCode::kInvalidArgument, "builtin embedder expects RGB");

  Embedding out;
  out.vector.assign(kBuiltinDimension, 0.0);
  out.backend_id = kBuiltinId;
  out.source_id = std::move(source_id);
  out.variant = variant;

  for (int cy = 0; cy < kGridCells; ++cy) {
    const int y0 = cy * image.height / kGridCells;
    const int y1 = (cy + 1) * image.height / kGridCells;
    for (int cx = 0; cx < kGridCells; ++cx) {
      const int x0 = cx * image.width / kGridCells;
      const int x1 = (cx + 1) * image.width / kGridCells;
      const std::uint64_t n = static_cast<std::uint64_t>(y1 - y0) * (x1 - x0);
      if (n == 0) continue;
      for (int c = 0; c < 3; ++c) {
        std::uint64_t sum = 0;
        std::uint64_t sum_sq = 0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) {
            const std::uint64_t v = image.at(x, y, c);
            sum += v;
            sum_sq += v * v;
          }
        }
        // n * Σv² - (Σv)² is an exact non-negative integer.
        const std::uint64_t spread = n * sum_sq - sum * sum;
        const double nd = static_cast<double>(n);
        const std::size_t base = ((static_cast<std::size_t>(cy) * kGridCells + cx) * 3 + c) * 2;
        out.vector[base] = static_cast<double>(sum) / nd / 255.0;
        out.vector[base + 1] = std::sqrt(static_cast<double>(spread)) / nd / 255.0;
      }
    }
  }
  return out;
}

Embedding BuiltinBackend::embed(const EmbedRequest& request) const {
  if (!request.image) fail(ErrorCode::kInvalidArgument, "builtin backend needs image pixels");
  return embed_builtin(request.image(), request.source_id, request.variant);
}

FileBackend::FileBackend(std::filesystem::path dir, std::size_t dimension)
    : dir_(std::move(dir)), dimension_(dimension) {
  if (!std::filesystem::is_directory(dir_)) {
    fail(ErrorCode::kNotFound, "embedding directory " + dir_.string() + " does not exist");
  }
}

BackendDescriptor FileBackend::descriptor() const {
  std::lock_guard lock(mutex_);
  return {"file:" + dir_.string(), dimension_};
}

std::filesystem::path FileBackend::path_for(const std::string& source_id,
                                            EmbeddingVariant variant) const {
  return dir_ / (source_id + "." + variant.name() + ".vten");
}

Embedding FileBackend::load_embedding(const std::string& source_id,
                                      EmbeddingVariant variant) const {
  const auto path = path_for(source_id, variant);
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::kNotFound, "missing embedding file " + path.string());
  }
  const TensorBlob blob = read_tensor(path);
  {
    std::lock_guard lock(mutex_);
    if (dimension_ == 0) dimension_ = blob.data.size();
    if (blob.data.size() != dimension_) {
      fail(ErrorCode::kDimensionMismatch,
           path.filename().string() + " has " + std::to_string(blob.data.size()) +
               " values, backend dimension is " + std::to_string(dimension_));
    }
  }
  Embedding out;
  out.vector.assign(blob.data.begin(), blob.data.end());
  out.backend_id = "file:" + dir_.string();
  out.source_id = source_id;
  out.variant = variant;
  out.degenerate = out.norm() == 0.0;
  return out;
}

Embedding FileBackend::embed(const EmbedRequest& request) const {
  return load_embedding(request.source_id, request.variant);
}

std::unique_ptr<Backend> make_backend(const std::string& kind, const std::filesystem::path& dir) {
  if (kind == "builtin" || kind == kBuiltinId) return std::make_unique<BuiltinBackend>();
  if (kind == "file") return std::make_unique<FileBackend>(dir);
  fail(ErrorCode::kInvalidArgument, "unknown backend kind '" + kind + "'");
}

double cosine(const Embedding& u, const Embedding& v) {
  if (u.backend_id != v.backend_id) {
    fail(ErrorCode::kDimensionMismatch,
         "embeddings come from different backends (" + u.backend_id + ", " + v.backend_id + ")");
  }
  if (u.vector.size() != v.vector.size() || u.vector.empty()) {
    fail(ErrorCode::kDimensionMismatch, "embedding dimensions differ");
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.vector.size(); ++i) {
    dot += u.vector[i] * v.vector[i];
    uu += u.vector[i] * u.vector[i];
    vv += v.vector[i] * v.vector[i];
  }
  if (u.degenerate || v.degenerate || uu == 0.0 || vv == 0.0) {
    fail(ErrorCode::kDegenerate, "cosine of a zero-norm embedding is undefined");
  }
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

}  // namespace vton::embedding
