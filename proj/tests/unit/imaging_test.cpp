#include <gtest/gtest.h>

#include "mosaic/imaging.hpp"
#include "test_support.hpp"

using namespace mosaic;

namespace {

Rgb8Image solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Rgb8Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  return img;
}

}  // namespace

TEST(Grayscale, WhiteBlackRed) {
  const GrayImage white = to_grayscale(solid(4, 3, 255, 255, 255));
  const GrayImage black = to_grayscale(solid(4, 3, 0, 0, 0));
  const GrayImage red = to_grayscale(solid(4, 3, 255, 0, 0));
  for (double v : white.buffer()) EXPECT_NEAR(v, 1.0, 1e-12);
  for (double v : black.buffer()) EXPECT_EQ(v, 0.0);
  for (double v : red.buffer()) EXPECT_NEAR(v, 0.299, 1e-6);
}

TEST(Grayscale, ReplicatedGrayIsIdempotent) {
  const Rgb8Image rgb = test::random_rgb8(16, 9, 3);
  const GrayImage g = to_grayscale(rgb);
  Rgb8Image again(16, 9, 3);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) again.at(x, y, c) = static_cast<std::uint8_t>(std::lround(g.at(x, y) * 255));
  const GrayImage g2 = to_grayscale(again);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 16; ++x) EXPECT_NEAR(g2.at(x, y), std::lround(g.at(x, y) * 255) / 255.0, 1e-9);
}

TEST(Image, RejectsBadShapes) {
  EXPECT_THROW(RealImage(0, 4, 1), Error);
  EXPECT_THROW(Frame(0, Rgb8Image(4, 4, 1)), Error);
}

TEST(Warp, IdentityReproducesInput) {
  const RealImage src = test::random_image(20, 15, 1, 1);
  const auto out = warp_perspective(src, Homography::identity(), {20, 15});
  EXPECT_EQ(out.image, src);
  for (auto m : out.mask.buffer()) EXPECT_EQ(m, 1);
}

TEST(Warp, TranslationMatchesIndexShift) {
  const RealImage src = test::random_image(64, 64, 1, 2);
  const auto out = warp_perspective(src, Homography::translation(5, 0), {64, 64}, 0.25);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 5; ++x) {
      EXPECT_EQ(out.image.at(x, y), 0.25);
      EXPECT_EQ(out.mask.at(x, y), 0);
    }
    for (int x = 5; x < 64; ++x) {
      EXPECT_EQ(out.image.at(x, y), src.at(x - 5, y));
      EXPECT_EQ(out.mask.at(x, y), 1);
    }
  }
}

TEST(Warp, AllOutsideGivesFill) {
  const RealImage src = test::random_image(10, 10, 3, 3);
  const auto out = warp_perspective(src, Homography::translation(500, 0), {10, 10}, 0.5);
  for (double v : out.image.buffer()) EXPECT_EQ(v, 0.5);
  for (auto m : out.mask.buffer()) EXPECT_EQ(m, 0);
}

TEST(Warp, SingularHomographyRejected) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(2, 2) = 1.0;
  EXPECT_THROW(Homography{m}, Error);
  try {
    Homography{m};
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularHomography);
  }
}

TEST(Warp, RoundTripRestoresInterior) {
  const RealImage src = test::smooth_image(80, 60, 1, 4, 5.0);
  const Homography h = Homography::from_row_major({1.02, 0.03, 2.5, -0.02, 0.98, 1.5, 1e-4, -5e-5, 1.0});
  const auto fwd = warp_perspective(src, h, {90, 70});
  const auto back = warp_perspective(fwd.image, h.inverse(), {80, 60});
  int checked = 0;
  for (int y = 2; y < 58; ++y)
    for (int x = 2; x < 78; ++x) {
      // Only pixels whose round trip stayed inside the intermediate canvas.
      const Point2 p = h.apply({double(x), double(y)});
      if (p.x < 3 || p.y < 3 || p.x > 86 || p.y > 66) continue;
      EXPECT_NEAR(back.image.at(x, y), src.at(x, y), 2.0 / 255) << x << "," << y;
      ++checked;
    }
  EXPECT_GT(checked, 3000);
}

TEST(Warp, MaskMonotoneUnderCanvasGrowth) {
  const RealImage src = test::random_image(30, 20, 1, 5);
  const Homography h = Homography::from_row_major({0.9, 0.1, 4, 0.05, 1.1, -2, 0, 0, 1});
  const auto small = warp_perspective(src, h, {25, 25});
  const auto big = warp_perspective(src, h, {60, 50});
  for (int y = 0; y < 25; ++y)
    for (int x = 0; x < 25; ++x) {
      EXPECT_EQ(small.mask.at(x, y), big.mask.at(x, y));
      EXPECT_LE(small.mask.at(x, y), 1);
    }
}

TEST(Homography, NormalizesAndComposes) {
  const Homography h = Homography::from_row_major({2, 0, 10, 0, 2, 4, 0, 0, 2});
  EXPECT_DOUBLE_EQ(h(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(h(0, 2), 5.0);
  const Homography t = Homography::translation(3, 4) * Homography::translation(1, -1);
  EXPECT_DOUBLE_EQ(t.apply({0, 0}).x, 4.0);
  EXPECT_DOUBLE_EQ(t.apply({0, 0}).y, 3.0);
  EXPECT_LT(frobenius_distance(h * h.inverse(), Homography::identity()), 1e-12);
  EXPECT_NEAR(mean_corner_error(Homography::translation(1, 0), Homography::identity(), 10, 10), 1.0, 1e-12);
}

TEST(Blur, ConstantPreservedAndKernelNormalized) {
  const auto k = gaussian_kernel(1.3);
  double sum = 0.0;
  for (double v : k) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(k.size(), 2 * 6 + 1u);
  const RealImage flat(12, 7, 2, 0.4);
  const RealImage blurred = gaussian_blur(flat, 2.0);
  for (double v : blurred.buffer()) EXPECT_NEAR(v, 0.4, 1e-12);
}
