#include <gtest/gtest.h>

#include "mosaic/frame_selection.hpp"
#include "test_support.hpp"

using namespace mosaic;

namespace {

// Window of a wide texture starting at column x0.
GrayImage window(const RealImage& scene, int x0, int w) {
  GrayImage out(w, scene.height(), 1);
  for (int y = 0; y < scene.height(); ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = scene.at(x0 + x, y);
  return out;
}

// Exhaustive oracle: evaluate every shift, take min SAD, ties by |d| then sign.
OffsetMeasurement brute_force(const GrayImage& ref, const GrayImage& tgt, int cx, int cy, int half, int range) {
  OffsetMeasurement best{0, std::numeric_limits<double>::infinity()};
  for (int d = -range; d <= range; ++d) {
    double s = 0.0;
    for (int j = -half; j <= half; ++j)
      for (int i = -half; i <= half; ++i) s += std::abs(tgt.at(cx + d + i, cy + j) - ref.at(cx + i, cy + j));
    const bool better = s < best.sad || (s == best.sad && (std::abs(d) < std::abs(best.displacement) ||
                                                            (std::abs(d) == std::abs(best.displacement) &&
                                                             d < best.displacement)));
    if (better) best = {d, s};
  }
  return best;
}

}  // namespace

TEST(SadOffset, IdenticalFramesGiveZero) {
  const RealImage img = test::random_image(80, 40, 1, 1);
  BlockMatchConfig cfg;
  cfg.search_range = 10;
  const auto m = sad_block_offset(img, img, cfg);
  EXPECT_EQ(m.displacement, 0);
  EXPECT_EQ(m.sad, 0.0);
}

TEST(SadOffset, SevenPixelShiftMatchesOracle) {
  const RealImage scene = test::random_image(200, 50, 1, 7);
  const GrayImage ref = window(scene, 0, 120);
  const GrayImage tgt = window(scene, 7, 120);
  BlockMatchConfig cfg;
  cfg.search_range = 15;
  const auto m = sad_block_offset(tgt, ref, cfg);
  EXPECT_EQ(m.displacement, 7);
  EXPECT_EQ(m.sad, 0.0);
  const auto oracle = brute_force(tgt, ref, 60, 25, 10, 15);
  EXPECT_EQ(oracle.displacement, m.displacement);
}

TEST(SadOffset, FlatFramesTieToZero) {
  const GrayImage flat(60, 30, 1, 0.5);
  BlockMatchConfig cfg;
  cfg.search_range = 8;
  const auto m = sad_block_offset(flat, flat, cfg);
  EXPECT_EQ(m.displacement, 0);
  EXPECT_EQ(m.sad, 0.0);
}

TEST(SadOffset, TieBreaksTowardNegative) {
  // Period-2 stripes: every even shift matches exactly, odd shifts do not.
  GrayImage a(60, 30, 1);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 60; ++x) a.at(x, y) = (x / 2) % 2 ? 1.0 : 0.0;
  GrayImage b(60, 30, 1);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 60; ++x) b.at(x, y) = a.at(std::min(x + 1, 59), y);
  BlockMatchConfig cfg;
  cfg.block_size = 5;
  cfg.search_range = 6;
  const auto m = sad_block_offset(a, b, cfg);
  const auto oracle = brute_force(a, b, 30, 15, 2, 6);
  EXPECT_EQ(m.displacement, oracle.displacement);
  EXPECT_EQ(m.displacement, -1);
}

TEST(SadOffset, Errors) {
  const GrayImage a(40, 30, 1, 0.0);
  BlockMatchConfig cfg;
  cfg.search_range = 15;
  EXPECT_THROW(sad_block_offset(a, a, cfg), Error);
  try {
    sad_block_offset(a, a, cfg);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PatchOutOfBounds);
  }
  cfg.search_range = 2;
  EXPECT_THROW(sad_block_offset(a, GrayImage(41, 30, 1), cfg), Error);
  cfg.block_size = 4;
  EXPECT_THROW(sad_block_offset(a, a, cfg), Error);
}

TEST(SelectFrames, IdenticalKeepsFirstAndLast) {
  const RealImage img = test::random_image(100, 40, 1, 2);
  const std::vector<GrayImage> seq(6, img);
  const auto r = select_frame_indices(seq, {}, 20);
  EXPECT_EQ(r.kept, (std::vector<std::size_t>{0, 5}));
}

TEST(SelectFrames, SingleFrame) {
  const std::vector<GrayImage> seq{test::random_image(100, 40, 1, 2)};
  EXPECT_EQ(select_frame_indices(seq, {}, 20).kept, (std::vector<std::size_t>{0}));
}

TEST(SelectFrames, PanThreePixelsPerFrame) {
  const RealImage scene = test::random_image(400, 50, 1, 11);
  std::vector<GrayImage> seq;
  for (int i = 0; i < 40; ++i) seq.push_back(window(scene, 3 * i, 160));
  const auto r = select_frame_indices(seq, {}, 30);
  EXPECT_EQ(r.kept, (std::vector<std::size_t>{0, 10, 20, 30, 39}));
  // Panning right moves content left, so the measured shift is negative.
  for (const auto& s : r.steps) {
    const int truth = -3 * static_cast<int>(s.frame - s.reference);
    if (truth >= -30) {
      EXPECT_EQ(s.offset.displacement, truth);
    }
    if (!s.kept) {
      EXPECT_LT(std::abs(s.offset.displacement), 30);
    }
  }
}

TEST(SelectFrames, RejectsBadArguments) {
  EXPECT_THROW(select_frame_indices({}, {}, 10), Error);
  const std::vector<GrayImage> seq{GrayImage(100, 40, 1)};
  EXPECT_THROW(select_frame_indices(seq, {}, 0), Error);
}

TEST(SelectFrames, FrameOverloadPreservesOrder) {
  const RealImage scene = test::random_image(300, 40, 3, 5);
  std::vector<Frame> frames;
  for (int i = 0; i < 8; ++i) {
    Rgb8Image rgb(120, 40, 3);
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 120; ++x)
        for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = static_cast<std::uint8_t>(scene.at(x + 4 * i, y, c) * 255);
    frames.emplace_back(i, std::move(rgb));
  }
  const auto kept = select_frames(frames, {}, 12);
  ASSERT_EQ(kept.size(), 4u);
  EXPECT_EQ(kept[0].index, 0u);
  EXPECT_EQ(kept[1].index, 3u);
  EXPECT_EQ(kept[2].index, 6u);
  EXPECT_EQ(kept[3].index, 7u);
}
