#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "vton/core/types.hpp"

namespace vton::embedding {

struct BackendDescriptor {
  std::string backend_id;  // "builtin-patchstat" or "file:<dir>"
  std::size_t dimension = 0;
};

inline constexpr int kGridCells = 8;
inline constexpr std::size_t kBuiltinDimension = kGridCells * kGridCells * 3 * 2;
inline constexpr const char* kBuiltinId = "builtin-patchstat";

/// Deterministic stand-in for the frozen encoder: per cell of an 8x8 grid and
/// per channel, the mean and standard deviation of the 8-bit values scaled to
/// [0, 1]. Layout is ((cell_y * 8 + cell_x) * 3 + channel) * 2 + {0 mean, 1 std}.
/// Moments are accumulated in integers so the result is independent of
/// summation order.
Embedding embed_builtin(const Raster& image, std::string source_id = {},
                        EmbeddingVariant variant = EmbeddingVariant::full());

/// What to embed: the id and variant name the file convention, the image
/// producer is only invoked by backends that compute from pixels.
struct EmbedRequest {
  std::string source_id;
  EmbeddingVariant variant;
  std::function<Raster()> image;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendDescriptor descriptor() const = 0;
  virtual Embedding embed(const EmbedRequest& request) const = 0;
  /// True when the backend needs decoded pixels (and masks) to embed.
  virtual bool computes_from_pixels() const = 0;
};

class BuiltinBackend final : public Backend {
 public:
  BackendDescriptor descriptor() const override { return {kBuiltinId, kBuiltinDimension}; }
  Embedding embed(const EmbedRequest& request) const override;
  bool computes_from_pixels() const override { return true; }
};

/// Loads adapter-written `<dir>/<source_id>.<variant>.vten` files. The
/// dimension is fixed by the descriptor, or by the first file loaded when the
/// descriptor says 0.
class FileBackend final : public Backend {
 public:
  explicit FileBackend(std::filesystem::path dir, std::size_t dimension = 0);
  BackendDescriptor descriptor() const override;
  Embedding embed(const EmbedRequest& request) const override;
  bool computes_from_pixels() const override { return false; }

  Embedding load_embedding(const std::string& source_id, EmbeddingVariant variant) const;
  std::filesystem::path path_for(const std::string& source_id, EmbeddingVariant variant) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  mutable std::size_t dimension_;
};

std::unique_ptr<Backend> make_backend(const std::string& kind,
                                      const std::filesystem::path& dir = {});

/// uᵀv / (‖u‖‖v‖) clamped to [-1, 1]. Throws kDegenerate on a zero-norm
/// operand and kDimensionMismatch on differing backends or sizes.
double cosine(const Embedding& u, const Embedding& v);

}  // namespace vton::embedding
