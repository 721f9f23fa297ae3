#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "vton/core/error.hpp"
#include "vton/morphology.hpp"

namespace vton::morphology {
namespace {

using testing::random_mask;

// Erosion straight from the definition: every element offset must land on
// foreground, and anything outside the image is background.
BinaryMask erode_oracle(const BinaryMask& m, const std::vector<std::pair<int, int>>& offsets) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool fits = true;
      for (auto [dx, dy] : offsets) fits = fits && m.at_or_background(x + dx, y + dy);
      out.set(x, y, fits);
    }
  }
  return out;
}

BinaryMask dilate_oracle(const BinaryMask& m, const std::vector<std::pair<int, int>>& offsets) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool hit = false;
      for (auto [dx, dy] : offsets) hit = hit || m.at_or_background(x - dx, y - dy);
      out.set(x, y, hit);
    }
  }
  return out;
}

BinaryMask from_bits(int width, int height, unsigned bits) {
  BinaryMask m(width, height);
  for (int i = 0; i < width * height; ++i) m.set(i % width, i / width, (bits >> i) & 1u);
  return m;
}

// The 3x3 pattern placed at the centre of a larger canvas.
BinaryMask embedded(unsigned bits, int canvas) {
  BinaryMask m(canvas, canvas);
  const int o = canvas / 2 - 1;
  for (int i = 0; i < 9; ++i) m.set(o + i % 3, o + i / 3, (bits >> i) & 1u);
  return m;
}

const StructuringElement kSquare = StructuringElement::square(3);

TEST(StructuringElement, SquareOffsets) {
  EXPECT_EQ(kSquare.offsets().size(), 9u);
  EXPECT_TRUE(kSquare.contains_origin());
  EXPECT_EQ(kSquare.self_dilated(2), StructuringElement::square(5));
  EXPECT_EQ(kSquare.self_dilated(0).offsets().size(), 1u);
}

TEST(StructuringElement, RejectsEvenOrEmpty) {
  EXPECT_THROW(StructuringElement(2, 3, std::vector<std::uint8_t>(6, 1)), Error);
  EXPECT_THROW(StructuringElement(3, 3, std::vector<std::uint8_t>(9, 0)), Error);
  EXPECT_THROW(StructuringElement(3, 3, std::vector<std::uint8_t>(8, 1)), Error);
}

TEST(StructuringElement, MirrorIsPointReflection) {
  StructuringElement l(3, 3, {1, 1, 0, 0, 1, 0, 0, 0, 0});
  const auto m = l.mirrored();
  EXPECT_EQ(m, StructuringElement(3, 3, {0, 0, 0, 0, 1, 0, 0, 1, 1}));
  EXPECT_EQ(m.mirrored(), l);
}

TEST(Erode, Examples) {
  const auto full = BinaryMask(3, 3, true);
  const auto eroded = erode(full, kSquare);
  EXPECT_EQ(eroded.count(), 1u);  // only the centre fits; the border is background
  EXPECT_TRUE(eroded.at(1, 1));

  const auto block = testing::rect_mask(5, 5, 0, 0, 5, 5);
  const auto center = erode(block, kSquare);
  EXPECT_EQ(center, testing::rect_mask(5, 5, 1, 1, 4, 4));
  EXPECT_EQ(erode(BinaryMask(4, 4), kSquare).count(), 0u);
}

TEST(Erode, ExhaustiveThreeByThreeMatchesOracle) {
  for (unsigned bits = 0; bits < 512; ++bits) {
    for (const auto& m : {from_bits(3, 3, bits), embedded(bits, 7)}) {
      const auto e = erode(m, kSquare);
      ASSERT_EQ(e, erode_oracle(m, kSquare.offsets())) << "bits=" << bits;
      ASSERT_EQ(dilate(m, kSquare), dilate_oracle(m, kSquare.offsets())) << "bits=" << bits;
      ASSERT_TRUE(e.subset_of(m)) << "anti-extensivity, bits=" << bits;
    }
  }
}

TEST(Erode, ExhaustiveMonotone) {
  // Every mask against every one-bit-smaller submask.
  for (unsigned bits = 0; bits < 512; ++bits) {
    const auto big = embedded(bits, 7);
    const auto eb = erode(big, kSquare);
    const auto db = dilate(big, kSquare);
    for (int i = 0; i < 9; ++i) {
      if (!((bits >> i) & 1u)) continue;
      const auto small = embedded(bits & ~(1u << i), 7);
      ASSERT_TRUE(erode(small, kSquare).subset_of(eb)) << bits << " minus bit " << i;
      ASSERT_TRUE(dilate(small, kSquare).subset_of(db)) << bits << " minus bit " << i;
    }
  }
}

TEST(Erode, ExhaustiveAllElementsOnSmallMasks) {
  // All 256 elements with the origin set, applied to random 6x6 masks.
  std::mt19937_64 rng(11);
  for (unsigned e = 0; e < 512; ++e) {
    if (!((e >> 4) & 1u)) continue;
    std::vector<std::uint8_t> bits(9);
    for (int i = 0; i < 9; ++i) bits[i] = (e >> i) & 1u;
    const StructuringElement elem(3, 3, bits);
    for (int trial = 0; trial < 4; ++trial) {
      const auto m = random_mask(6, 6, 0.7, rng);
      ASSERT_EQ(erode(m, elem), erode_oracle(m, elem.offsets()));
      ASSERT_EQ(dilate(m, elem), dilate_oracle(m, elem.offsets()));
    }
  }
}

TEST(ErosionHierarchy, NestedAndDegenerateFlags) {
  const auto mask = testing::rect_mask(9, 9, 1, 1, 8, 8);  // 7x7 block
  const auto h = erosion_hierarchy(mask, kSquare, 5);
  ASSERT_EQ(h.levels.size(), 5u);
  EXPECT_EQ(h.levels[0], mask);
  const std::size_t expected[] = {49, 25, 9, 1, 0};
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(h.levels[k].count(), expected[k]) << k;
    EXPECT_EQ(h.degenerate[k], expected[k] == 0) << k;
    if (k > 0) EXPECT_TRUE(h.levels[k].subset_of(h.levels[k - 1]));
  }
}

TEST(ErosionHierarchy, RandomMasksComposite) {
  // Nesting and erode^k(M, B) == erode(M, B ⊕ ... ⊕ B with k copies).
  std::mt19937_64 rng(2024);
  std::vector<StructuringElement> composite;
  for (int k = 0; k < 4; ++k) composite.push_back(kSquare.self_dilated(k));
  for (int trial = 0; trial < 500; ++trial) {
    const double density = 0.5 + 0.45 * (trial % 10) / 10.0;
    const auto m = random_mask(64, 64, density, rng);
    const auto h = erosion_hierarchy(m, kSquare, 4);
    ASSERT_EQ(h.levels[0], m);
    for (int k = 1; k < 4; ++k) {
      ASSERT_TRUE(h.levels[k].subset_of(h.levels[k - 1])) << trial;
      ASSERT_EQ(h.levels[k], erode(m, composite[k])) << "trial " << trial << " level " << k;
    }
  }
}

TEST(ErosionHierarchy, RejectsBadLevels) {
  EXPECT_THROW(erosion_hierarchy(BinaryMask(4, 4), kSquare, 0), Error);
}

}  // namespace
}  // namespace vton::morphology
