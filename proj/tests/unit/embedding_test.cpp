#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "vton/core/error.hpp"
#include "vton/core/tensor_io.hpp"
#include "vton/embedding.hpp"

namespace vton::embedding {
namespace {

// Two-pass floating-point moments per cell, written independently of the
// integer accumulation in the embedder.
std::vector<double> patchstat_oracle(const Raster& img) {
  std::vector<double> out;
  for (int cy = 0; cy < 8; ++cy) {
    for (int cx = 0; cx < 8; ++cx) {
      const int x0 = cx * img.width / 8, x1 = (cx + 1) * img.width / 8;
      const int y0 = cy * img.height / 8, y1 = (cy + 1) * img.height / 8;
      for (int c = 0; c < 3; ++c) {
        std::vector<double> v;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) v.push_back(img.at(x, y, c) / 255.0);
        }
        if (v.empty()) {
          out.insert(out.end(), {0.0, 0.0});
          continue;
        }
        double m = 0.0;
        for (double a : v) m += a;
        m /= static_cast<double>(v.size());
        double var = 0.0;
        for (double a : v) var += (a - m) * (a - m);
        out.push_back(m);
        out.push_back(std::sqrt(var / static_cast<double>(v.size())));
      }
    }
  }
  return out;
}

Raster mirror_x(const Raster& img) {
  Raster out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) out.at(img.width - 1 - x, y, c) = img.at(x, y, c);
    }
  }
  return out;
}

Embedding make(std::vector<double> v, std::string backend = "b") {
  Embedding e;
  e.vector = std::move(v);
  e.backend_id = std::move(backend);
  return e;
}

TEST(Builtin, MatchesMomentOracle) {
  std::mt19937_64 rng(1);
  for (auto [w, h] : {std::pair{64, 64}, {37, 29}, {8, 8}, {5, 12}}) {
    const auto img = testing::random_raster(w, h, rng);
    const auto e = embed_builtin(img);
    const auto oracle = patchstat_oracle(img);
    ASSERT_EQ(e.vector.size(), kBuiltinDimension);
    for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(e.vector[i], oracle[i], 1e-12) << w << "x" << h << " @" << i;
  }
}

TEST(Builtin, ConstantImage) {
  const auto e = embed_builtin(Raster(16, 16, 3, 51));
  for (std::size_t i = 0; i < e.vector.size(); i += 2) {
    EXPECT_DOUBLE_EQ(e.vector[i], 0.2);
    EXPECT_DOUBLE_EQ(e.vector[i + 1], 0.0);
  }
  EXPECT_EQ(e.backend_id, kBuiltinId);
}

TEST(Builtin, MirrorPermutesCells) {
  std::mt19937_64 rng(9);
  const auto img = testing::random_raster(64, 40, rng);
  const auto a = embed_builtin(img).vector;
  const auto b = embed_builtin(mirror_x(img)).vector;
  for (int cy = 0; cy < 8; ++cy) {
    for (int cx = 0; cx < 8; ++cx) {
      for (int k = 0; k < 6; ++k) {
        EXPECT_EQ(b[(cy * 8 + (7 - cx)) * 6 + k], a[(cy * 8 + cx) * 6 + k]);
      }
    }
  }
}

TEST(Builtin, Deterministic) {
  std::mt19937_64 rng(4);
  const auto img = testing::random_raster(48, 48, rng);
  EXPECT_EQ(embed_builtin(img).vector, embed_builtin(img).vector);
  EXPECT_THROW(embed_builtin(Raster()), Error);
}

TEST(Cosine, Properties) {
  const auto u = make({1, 2, 3});
  const auto v = make({-2, 0.5, 4});
  EXPECT_NEAR(cosine(u, u), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(cosine(u, v), cosine(v, u));
  EXPECT_NEAR(cosine(u, make({3, 6, 9})), 1.0, 1e-15);
  EXPECT_NEAR(cosine(u, make({-1, -2, -3})), -1.0, 1e-15);
  EXPECT_DOUBLE_EQ(cosine(make({1, 0}), make({0, 5})), 0.0);
  const double expected = (1 * -2 + 2 * 0.5 + 3 * 4) / (std::sqrt(14.0) * std::sqrt(4 + 0.25 + 16));
  EXPECT_NEAR(cosine(u, v), expected, 1e-15);
}

TEST(Cosine, Errors) {
  try {
    cosine(make({0, 0}), make({1, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
  try {
    cosine(make({1, 0}), make({1, 0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  try {
    cosine(make({1, 0}, "a"), make({1, 0}, "b"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Variant, Names) {
  EXPECT_EQ(EmbeddingVariant::full().name(), "full_image");
  EXPECT_EQ(EmbeddingVariant::masked(3).name(), "masked_level_3");
  EXPECT_EQ(EmbeddingVariant::parse("masked_level_2"), EmbeddingVariant::masked(2));
  EXPECT_EQ(EmbeddingVariant::parse("full_image"), EmbeddingVariant::full());
  EXPECT_THROW(EmbeddingVariant::parse("masked_level_x"), Error);
}

TEST(FileBackend, LoadsAdapterFiles) {
  testing::TempDir dir;
  write_tensor({{1, 4}, {1, 2, 3, 4}}, dir / "t1.full_image.vten");
  write_tensor({{4}, {0, 0, 0, 0}}, dir / "m--t1.masked_level_1.vten");
  write_tensor({{3}, {1, 2, 3}}, dir / "short.full_image.vten");
  FileBackend backend(dir.path());
  EXPECT_FALSE(backend.computes_from_pixels());
  const auto e = backend.embed({"t1", EmbeddingVariant::full(), {}});
  EXPECT_EQ(e.vector, (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(backend.descriptor().dimension, 4u);
  EXPECT_TRUE(backend.load_embedding("m--t1", EmbeddingVariant::masked(1)).degenerate);
  try {
    backend.load_embedding("short", EmbeddingVariant::full());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kDimensionMismatch);
  }
  try {
    backend.load_embedding("absent", EmbeddingVariant::full());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kNotFound);
  }
}

TEST(MakeBackend, Kinds) {
  EXPECT_TRUE(make_backend("builtin")->computes_from_pixels());
  EXPECT_THROW(make_backend("dinov3"), Error);
  EXPECT_THROW(make_backend("file", "/nonexistent/dir"), Error);
}

}  // namespace
}  // namespace vton::embedding
