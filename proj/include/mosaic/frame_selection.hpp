#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <vector>

#include "mosaic/imaging.hpp"

namespace mosaic {

struct PixelCoord {
  int x = 0;
  int y = 0;
};

struct BlockMatchConfig {
  int block_size = 21;
  int search_range = 0;                    // 0: derive from the offset threshold
  std::optional<PixelCoord> patch_center;  // default: image center
};

struct OffsetMeasurement {
  int displacement = 0;
  double sad = 0.0;
};

namespace detail {

inline void validate(const BlockMatchConfig& cfg) {
  if (cfg.block_size < 3 || cfg.block_size % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "block_size must be odd and >= 3");
  }
  if (cfg.search_range < 1) throw Error(ErrorCode::InvalidArgument, "search_range must be >= 1");
}

inline PixelCoord patch_center_for(const GrayImage& img, const BlockMatchConfig& cfg) {
  return cfg.patch_center.value_or(PixelCoord{img.width() / 2, img.height() / 2});
}

}  // namespace detail

/// Horizontal SAD block search. The reference block sits at the configured
/// ROI; the target block is the same ROI shifted by d in x. Returns the d with
/// the smallest SAD, ties resolved toward smaller |d| and then negative d.
inline OffsetMeasurement sad_block_offset(const GrayImage& reference, const GrayImage& target,
                                          const BlockMatchConfig& cfg) {
  detail::validate(cfg);
  if (reference.width() != target.width() || reference.height() != target.height()) {
    throw Error(ErrorCode::DimensionMismatch, "reference and target differ in size");
  }
  const PixelCoord c = detail::patch_center_for(reference, cfg);
  const int half = cfg.block_size / 2;
  if (c.y - half < 0 || c.y + half >= reference.height() || c.x - half - cfg.search_range < 0 ||
      c.x + half + cfg.search_range >= reference.width()) {
    throw Error(ErrorCode::PatchOutOfBounds, "ROI plus search range exits the frame");
  }

  auto sad_at = [&](int d) {
    double sum = 0.0;
    for (int j = -half; j <= half; ++j)
      for (int i = -half; i <= half; ++i)
        sum += std::abs(target.at(c.x + d + i, c.y + j) - reference.at(c.x + i, c.y + j));
    return sum;
  };

  // Visit 0, -1, +1, -2, +2, ... so strict improvement implements the tie-break.
  OffsetMeasurement best{0, sad_at(0)};
  for (int mag = 1; mag <= cfg.search_range; ++mag) {
    for (int d : {-mag, mag}) {
      const double s = sad_at(d);
      if (s < best.sad) best = {d, s};
    }
  }
  return best;
}

struct SelectionStep {
  std::size_t frame = 0;      // position in the input sequence
  std::size_t reference = 0;  // position of the kept frame it was measured against
  OffsetMeasurement offset;
  bool kept = false;
};

struct SelectionResult {
  std::vector<std::size_t> kept;  // positions in the input sequence
  std::vector<SelectionStep> steps;
};

/// 25% of the frame width. When search_range is left at 0 it takes this
/// threshold, so saturating the search coincides with reaching it.
inline int default_offset_threshold(int frame_width) { return std::max(1, frame_width / 4); }

/// Sequential keyframe scan over grayscale frames.
inline SelectionResult select_frame_indices(const std::vector<GrayImage>& grays, BlockMatchConfig cfg,
                                            int offset_threshold) {
  if (grays.empty()) throw Error(ErrorCode::InvalidArgument, "no frames to select from");
  if (offset_threshold < 1) throw Error(ErrorCode::InvalidArgument, "offset_threshold must be >= 1");
  if (cfg.search_range == 0) cfg.search_range = offset_threshold;

  SelectionResult out;
  out.kept.push_back(0);
  std::size_t ref = 0;
  for (std::size_t i = 1; i < grays.size(); ++i) {
    SelectionStep step{i, ref, sad_block_offset(grays[ref], grays[i], cfg), false};
    const int mag = std::abs(step.offset.displacement);
    if (mag >= offset_threshold || mag >= cfg.search_range) {
      step.kept = true;
      out.kept.push_back(i);
      ref = i;
    }
    out.steps.push_back(step);
  }
  if (out.kept.back() != grays.size() - 1) {
    out.kept.push_back(grays.size() - 1);
    out.steps.back().kept = true;
  }
  return out;
}

inline std::vector<Frame> select_frames(const std::vector<Frame>& frames, const BlockMatchConfig& cfg,
                                        int offset_threshold) {
  std::vector<GrayImage> grays;
  grays.reserve(frames.size());
  for (const auto& f : frames) grays.push_back(to_grayscale(f));
  const auto result = select_frame_indices(grays, cfg, offset_threshold);
  std::vector<Frame> kept;
  for (std::size_t i : result.kept) kept.push_back(frames[i]);
  return kept;
}

}  // namespace mosaic
