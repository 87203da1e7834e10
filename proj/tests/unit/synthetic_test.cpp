#include <gtest/gtest.h>

#include "mosaic/color_alignment.hpp"
#include "mosaic/registration.hpp"
#include "mosaic/synthetic.hpp"

using namespace mosaic;

TEST(Synthetic, SameSeedIsBitIdentical) {
  SceneSpec spec;
  spec.noise_sigma = 2.0 / 255;
  const auto a = generate_sequence(spec);
  const auto b = generate_sequence(spec);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) EXPECT_EQ(a.frames[i].rgb, b.frames[i].rgb);
  spec.seed = 2;
  EXPECT_FALSE(generate_sequence(spec).frames[0].rgb == a.frames[0].rgb);
}

TEST(Synthetic, ZeroMotionGivesIdenticalFrames) {
  SceneSpec spec;
  spec.step = {0, 0};
  const auto seq = generate_sequence(spec);
  for (const auto& f : seq.frames) EXPECT_EQ(f.rgb, seq.frames[0].rgb);
  for (const auto& h : seq.pairwise) EXPECT_LT(frobenius_distance(h, Homography::identity()), 1e-12);
  for (const auto& h : seq.global) EXPECT_LT(frobenius_distance(h, Homography::identity()), 1e-12);
}

TEST(Synthetic, PanGivesTranslationPairwise) {
  SceneSpec spec;
  const auto seq = generate_sequence(spec);
  ASSERT_EQ(seq.pairwise.size(), 3u);
  for (const auto& h : seq.pairwise) EXPECT_LT(frobenius_distance(h, Homography::translation(5, 0)), 1e-12);
  EXPECT_LT(frobenius_distance(seq.global[3], Homography::translation(15, 0)), 1e-12);
  // Frame 1 pixel (x, y) shows the same scene point as frame 0 pixel (x + 5, y).
  for (int y = 0; y < spec.frame_height; ++y)
    for (int x = 0; x + 5 < spec.frame_width; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_EQ(seq.frames[1].rgb.at(x, y, c), seq.frames[0].rgb.at(x + 5, y, c));
}

TEST(Synthetic, ColorCastScalesChannelMeans) {
  SceneSpec spec;
  spec.step = {0, 0};
  spec.casts.resize(3);
  spec.casts[2].gain = {1.2, 1.0, 0.9};
  const auto seq = generate_sequence(spec);
  const auto s1 = channel_stats(seq.frames[1].rgb);
  const auto s2 = channel_stats(seq.frames[2].rgb);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(s2[c].mean, s1[c].mean * spec.casts[2].gain[c], 0.6);
}

TEST(Synthetic, NoiseFreePairsRegisterExactly) {
  SceneSpec spec;
  spec.frame_count = 2;
  spec.frame_to_scene = {Homography::translation(30, 30),
                         Homography::from_row_major({1.03, 0.02, 40, -0.01, 0.99, 35, 1e-4, 0, 1})};
  const auto seq = generate_sequence(spec);
  const GrayImage g0 = to_grayscale(seq.frames[0]);
  const GrayImage g1 = to_grayscale(seq.frames[1]);
  const auto k0 = detect_keypoints(g0), k1 = detect_keypoints(g1);
  const auto d0 = describe_all(g0, k0), d1 = describe_all(g1, k1);
  const auto m = match_nndr(d1, d0);
  std::vector<Point2> p0, p1;
  for (const auto& d : d0) p0.push_back({d.keypoint.x, d.keypoint.y});
  for (const auto& d : d1) p1.push_back({d.keypoint.x, d.keypoint.y});
  const auto r = estimate_homography(m, p1, p0);
  EXPECT_LT(mean_corner_error(r.homography, seq.pairwise[0], spec.frame_width, spec.frame_height), 0.1);
}

TEST(Synthetic, ParallaxBandMovesForeground) {
  SceneSpec spec;
  spec.frame_count = 2;
  spec.parallax = ParallaxBand{60, 80, 4.0};
  const auto seq = generate_sequence(spec);
  const int y = 60 - 40 + 5;  // inside the band in frame coordinates
  // Background rows still follow the camera exactly; band rows shift 4 px further.
  for (int x = 10; x < 100; ++x) {
    EXPECT_EQ(seq.frames[1].rgb.at(x, 5, 0), seq.frames[0].rgb.at(x + 5, 5, 0));
    EXPECT_EQ(seq.frames[1].rgb.at(x, y, 0), seq.frames[0].rgb.at(x + 9, y, 0));
  }
}

TEST(Synthetic, InvalidSpecs) {
  SceneSpec spec;
  spec.frame_count = 100;
  EXPECT_THROW(generate_sequence(spec), Error);
  spec = {};
  spec.noise_sigma = -1;
  EXPECT_THROW(generate_sequence(spec), Error);
  spec = {};
  spec.parallax = ParallaxBand{50, 40, 1};
  try {
    generate_sequence(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpecInvalid);
  }
}

TEST(Synthetic, ParseSpec) {
  const auto kv = KeyValueConfig::parse(
      "seed = 9\nframe_count = 3\nstep_x = 4\ncast.1 = 1.1,1,1,0,0,0.02\nparallax = 10,20,2.5\n");
  const SceneSpec s = parse_scene_spec(kv);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.frame_count, 3);
  EXPECT_EQ(s.step.x, 4.0);
  ASSERT_EQ(s.casts.size(), 2u);
  EXPECT_DOUBLE_EQ(s.casts[1].gain[0], 1.1);
  EXPECT_DOUBLE_EQ(s.casts[1].bias[2], 0.02);
  ASSERT_TRUE(s.parallax.has_value());
  EXPECT_EQ(s.parallax->y1, 20);
  EXPECT_THROW(parse_scene_spec(KeyValueConfig::parse("bogus = 1\n")), Error);
  EXPECT_THROW(parse_scene_spec(KeyValueConfig::parse("cast.0 = 1,2\n")), Error);
}
