#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "mosaic/cslbp.hpp"
#include "test_support.hpp"

using namespace mosaic;

TEST(CslbpCode, FlatIsZero) {
  const GrayImage flat(5, 5, 1, 0.3);
  for (double t : {0.0, 0.01, 0.5}) {
    CslbpParams p;
    p.threshold = t;
    EXPECT_EQ(cslbp_code(flat, 2, 2, p), 0u);
  }
}

TEST(CslbpCode, OnlyBitZeroFires) {
  CslbpParams p;
  GrayImage img(5, 5, 1, 0.4);
  img.at(3, 2) = 0.4 + 2 * p.threshold;  // g_0 on the +x axis, g_4 opposite
  EXPECT_EQ(cslbp_code(img, 2, 2, p), 1u);
}

TEST(CslbpCode, SixteenPatternsForEightNeighbors) {
  CslbpParams p;
  EXPECT_EQ(cslbp_bins(p), 16);
  std::mt19937_64 rng(3);
  std::set<unsigned> seen;
  for (int trial = 0; trial < 5000; ++trial) {
    const RealImage img = test::random_image(3, 3, 1, rng());
    const unsigned code = cslbp_code(img, 1, 1, p);
    EXPECT_LT(code, 16u);
    seen.insert(code);
  }
  EXPECT_EQ(seen.size(), 16u);
}

TEST(CslbpCode, CircleOutsideThrows) {
  const GrayImage img(5, 5, 1);
  try {
    cslbp_code(img, 0, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
  }
  CslbpParams p;
  p.neighbors = 7;
  EXPECT_THROW(cslbp_code(img, 2, 2, p), Error);
}

TEST(CslbpCode, InvariantToIntensityShift) {
  CslbpParams p;
  p.neighbors = 4;  // axis-aligned samples, exact arithmetic
  const RealImage img = test::random_image(20, 20, 1, 8, 0.0, 0.5);
  RealImage shifted = img;
  for (double& v : shifted.buffer()) v += 0.25;
  for (int y = 1; y < 19; ++y)
    for (int x = 1; x < 19; ++x) EXPECT_EQ(cslbp_code(img, x, y, p), cslbp_code(shifted, x, y, p));
}

TEST(CslbpDescriptor, DefaultLengthIs256) {
  EXPECT_EQ(descriptor_length(CslbpParams{}), 256u);
  const RealImage img = test::random_image(80, 80, 1, 1);
  Keypoint kp;
  kp.x = 40;
  kp.y = 40;
  kp.sigma = 2.0;
  EXPECT_EQ(describe(img, kp).values.size(), 256u);
}

TEST(CslbpDescriptor, FlatRegion) {
  const GrayImage flat(80, 80, 1, 0.6);
  Keypoint kp;
  kp.x = 40;
  kp.y = 40;
  kp.sigma = 1.5;
  const auto hist = cslbp_histogram(flat, kp);
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (i % 16 == 0) {
      EXPECT_NEAR(hist[i], 64.0, 1e-9);
    } else {
      EXPECT_EQ(hist[i], 0.0);
    }
  }
  const auto d = describe(flat, kp);
  for (std::size_t i = 0; i < d.values.size(); ++i) EXPECT_NEAR(d.values[i], i % 16 == 0 ? 0.25f : 0.0f, 1e-6);
}

TEST(CslbpDescriptor, RawMassEqualsCodedPixels) {
  const RealImage img = test::random_image(100, 100, 1, 2);
  Keypoint kp;
  kp.x = 50.3;
  kp.y = 47.8;
  kp.sigma = 3.1;
  for (bool share : {true, false}) {
    CslbpParams p;
    p.vote_sharing = share;
    const auto hist = cslbp_histogram(img, kp, p);
    EXPECT_NEAR(std::accumulate(hist.begin(), hist.end(), 0.0), 32.0 * 32.0, 1e-9);
  }
}

TEST(CslbpDescriptor, NormalizedAndClipped) {
  const RealImage img = test::random_image(100, 100, 1, 4);
  Keypoint kp;
  kp.x = 50;
  kp.y = 50;
  kp.sigma = 2.5;
  const auto d = describe(img, kp);
  double ss = 0.0;
  for (float v : d.values) ss += double(v) * v;
  EXPECT_NEAR(ss, 1.0, 1e-5);
  EXPECT_EQ(normalize_descriptor(std::vector<double>(256, 0.0), 0.2), std::vector<float>(256, 0.0f));
}

TEST(CslbpDescriptor, WholeCellShiftPermutesCells) {
  CslbpParams p;
  p.vote_sharing = false;
  const RealImage tex = test::random_image(60, 40, 1, 6);
  const int margin = 1, side = p.patch_size + 2 * margin, cell = p.patch_size / p.grid;
  auto window = [&](int x0) {
    GrayImage w(side, side, 1);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) w.at(x, y) = tex.at(x0 + x, y);
    return w;
  };
  const auto h1 = cslbp_histogram_of_patch(window(0), p);
  const auto h2 = cslbp_histogram_of_patch(window(cell), p);
  const int bins = cslbp_bins(p);
  for (int r = 0; r < p.grid; ++r)
    for (int c = 0; c + 1 < p.grid; ++c)
      for (int b = 0; b < bins; ++b)
        EXPECT_EQ(h2[(r * p.grid + c) * bins + b], h1[(r * p.grid + c + 1) * bins + b]);
}

TEST(CslbpDescriptor, RegionOutsideIsSkipped) {
  const RealImage img = test::random_image(60, 60, 1, 7);
  Keypoint inside, edge;
  inside.x = inside.y = 30;
  inside.sigma = 1.0;
  edge.x = 5;
  edge.y = 30;
  edge.sigma = 1.0;
  try {
    describe(img, edge);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RegionOutOfBounds);
  }
  EXPECT_EQ(describe_all(img, {inside, edge}).size(), 1u);
  EXPECT_DOUBLE_EQ(region_side(inside, {}), 24.0);
  Keypoint big;
  big.sigma = 3.0;
  EXPECT_DOUBLE_EQ(region_side(big, {}), 36.0);
}
