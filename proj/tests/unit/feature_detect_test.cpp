#include <gtest/gtest.h>

#include "mosaic/feature_detect.hpp"
#include "mosaic/synthetic.hpp"
#include "test_support.hpp"

using namespace mosaic;

namespace {

GrayImage gaussian_blob(int size, double cx, double cy, double sigma) {
  GrayImage img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      img.at(x, y) = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * sigma * sigma));
  return img;
}

GrayImage crop(const GrayImage& src, int x0, int y0, int w, int h) {
  GrayImage out(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = src.at(x0 + x, y0 + y);
  return out;
}

GrayImage texture(int w, int h, std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.scene_width = w;
  spec.scene_height = h;
  spec.frame_width = w;
  spec.frame_height = h;
  spec.frame_count = 1;
  spec.origin = {0, 0};
  return to_grayscale(generate_sequence(spec).frames[0]);
}

}  // namespace

TEST(Detect, ConstantImageHasNoKeypoints) {
  EXPECT_TRUE(detect_keypoints(GrayImage(64, 64, 1, 0.5)).empty());
}

TEST(Detect, TooSmallImageRejected) {
  try {
    detect_keypoints(GrayImage(31, 100, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImageTooSmall);
  }
}

TEST(Detect, GaussianBlobLocationAndScale) {
  const double sb = 4.0;
  const GrayImage img = gaussian_blob(128, 64, 64, sb);
  const ScaleSpaceConfig cfg;
  const auto kps = detect_keypoints(img, cfg);
  ASSERT_FALSE(kps.empty());
  const Keypoint& top = kps.front();
  EXPECT_LT(std::hypot(top.x - 64, top.y - 64), 1.0);
  if (kps.size() > 1) {
    EXPECT_GT(std::abs(top.response), 2.0 * std::abs(kps[1].response));
  }

  // Oracle: dense scan of the centre DoG value G(k s) - G(s) over s on the
  // input, blurred the same way the detector assumes (input sigma 0.5).
  const double k = std::pow(2.0, 1.0 / cfg.scales_per_octave);
  double best_s = 0.0, best_v = 0.0;
  for (double s = 1.0; s < 12.0; s += 0.02) {
    auto centre = [&](double sigma) {
      const double extra = std::sqrt(std::max(0.0, sigma * sigma - cfg.input_sigma * cfg.input_sigma));
      const double total = sb * sb + extra * extra;
      return sb * sb / total;  // peak of the blob blurred to variance `total`
    };
    const double v = std::abs(centre(k * s) - centre(s));
    if (v > best_v) {
      best_v = v;
      best_s = s;
    }
  }
  const double oracle_sigma = best_s * std::sqrt(k);
  EXPECT_NEAR(top.sigma, oracle_sigma, 0.25 * oracle_sigma);
  EXPECT_NEAR(top.sigma, sb * k, 0.25 * sb * k);
}

TEST(Detect, TranslationEquivariance) {
  const GrayImage scene = texture(220, 180, 21);
  const GrayImage a = crop(scene, 20, 20, 160, 128);
  const GrayImage b = crop(scene, 10, 14, 160, 128);  // content of a appears at +(10,6)
  const auto ka = detect_keypoints(a);
  const auto kb = detect_keypoints(b);
  int total = 0, hits = 0;
  for (const auto& p : ka) {
    const double m = 4.0 * p.sigma + 10;
    const double bx = p.x + 10, by = p.y + 6;
    if (p.x < m || p.y < m || p.x > 159 - m || p.y > 127 - m) continue;
    ++total;
    for (const auto& q : kb)
      if (std::hypot(q.x - bx, q.y - by) <= 0.5) {
        ++hits;
        break;
      }
  }
  ASSERT_GT(total, 30);
  EXPECT_GE(hits, 0.9 * total) << hits << " of " << total;
}

TEST(Detect, ContrastScalingKeepsLocations) {
  const GrayImage a = texture(160, 128, 5);
  GrayImage b = a;
  for (double& v : b.buffer()) v *= 2.0;
  const auto ka = detect_keypoints(a);
  const auto kb = detect_keypoints(b);
  ASSERT_FALSE(ka.empty());
  for (const auto& p : ka) {
    double best = 1e9;
    for (const auto& q : kb) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
    EXPECT_LT(best, 0.5);
  }
}

TEST(Detect, BorderMarginSortingAndDeterminism) {
  const GrayImage img = texture(200, 150, 9);
  const auto kps = detect_keypoints(img);
  ASSERT_GT(kps.size(), 50u);
  for (std::size_t i = 0; i < kps.size(); ++i) {
    const auto& p = kps[i];
    EXPECT_GE(p.x, 3 * p.sigma);
    EXPECT_GE(p.y, 3 * p.sigma);
    EXPECT_LE(p.x, 199 - 3 * p.sigma);
    EXPECT_LE(p.y, 149 - 3 * p.sigma);
    EXPECT_GT(p.sigma, 0.0);
    if (i > 0) {
      EXPECT_GE(std::abs(kps[i - 1].response), std::abs(p.response));
    }
  }
  const auto again = detect_keypoints(img);
  ASSERT_EQ(again.size(), kps.size());
  for (std::size_t i = 0; i < kps.size(); ++i) {
    EXPECT_EQ(again[i].x, kps[i].x);
    EXPECT_EQ(again[i].sigma, kps[i].sigma);
  }
}

TEST(Detect, CapKeepsStrongest) {
  const GrayImage img = texture(200, 150, 9);
  const auto all = detect_keypoints(img);
  ScaleSpaceConfig cfg;
  cfg.max_keypoints = 10;
  const auto capped = detect_keypoints(img, cfg);
  ASSERT_EQ(capped.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(capped[i].x, all[i].x);
}

TEST(Detect, DefaultOctaveCount) {
  EXPECT_EQ(resolve_octaves({}, 640, 480), 5);
  EXPECT_EQ(resolve_octaves({}, 32, 32), 2);
  ScaleSpaceConfig cfg;
  cfg.octaves = 2;
  EXPECT_EQ(resolve_octaves(cfg, 640, 480), 2);
}
