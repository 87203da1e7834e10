#pragma once

#include <array>
#include <cmath>

#include "mosaic/image.hpp"

namespace mosaic {

/// Population mean / standard deviation of one channel, 0..255 units.
struct ChannelStats {
  double mean = 0.0;
  double stddev = 0.0;
};

using RgbStats = std::array<ChannelStats, 3>;

inline constexpr double kDegenerateSigma = 1e-6;

template <typename T>
RgbStats channel_stats(const Image<T>& img) {
  RgbStats stats{};
  const double n = static_cast<double>(img.pixel_count());
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) sum += img.at(x, y, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        const double d = img.at(x, y, c) - mean;
        ss += d * d;
      }
    stats[c] = {mean, std::sqrt(ss / n)};
  }
  return stats;
}

/// Per-channel linear remap so the source takes the target's mean and
/// standard deviation. Values stay real and unclamped (0..255 scale). A
/// source channel with sigma below 1e-6 is set uniformly to the target mean.
template <typename T>
RealImage align_channels(const Image<T>& source, const RgbStats& target) {
  if (source.empty() || source.channels() != 3) {
    throw Error(ErrorCode::InvalidArgument, "color alignment needs a non-empty RGB source");
  }
  const RgbStats src = channel_stats(source);
  RealImage out(source.width(), source.height(), 3);
  for (int c = 0; c < 3; ++c) {
    const bool degenerate = src[c].stddev < kDegenerateSigma;
    const double gain = degenerate ? 0.0 : target[c].stddev / src[c].stddev;
    for (int y = 0; y < source.height(); ++y)
      for (int x = 0; x < source.width(); ++x) {
        out.at(x, y, c) = degenerate ? target[c].mean
                                     : gain * (source.at(x, y, c) - src[c].mean) + target[c].mean;
      }
  }
  return out;
}

/// Materialized 8-bit form: remap, clamp to [0,255], round.
inline Frame align_colors(const Frame& source, const Frame& target) {
  if (target.rgb.empty()) throw Error(ErrorCode::InvalidArgument, "empty target frame");
  const RealImage aligned = align_channels(source.rgb, channel_stats(target.rgb));
  return Frame(source.index, quantize(aligned, 1.0));
}

}  // namespace mosaic
