#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mosaic/feature_detect.hpp"

namespace mosaic {

struct CslbpParams {
  double radius = 1.0;
  int neighbors = 8;
  double threshold = 0.01;
  int grid = 4;
  double region_scale = 12.0;
  double min_region = 24.0;
  int patch_size = 32;       // canonical resampled patch side, pixels
  bool vote_sharing = true;  // bilinear cell interpolation of votes
  double clip = 0.2;
};

struct Descriptor {
  std::vector<float> values;
  Keypoint keypoint;
};

inline void validate(const CslbpParams& p) {
  if (p.neighbors < 4 || p.neighbors % 2 != 0 || p.neighbors > 32) {
    throw Error(ErrorCode::InvalidArgument, "CS-LBP neighbors must be even and in [4,32]");
  }
  if (p.radius < 1.0 || p.threshold < 0.0 || p.grid < 1 || p.patch_size < p.grid) {
    throw Error(ErrorCode::InvalidArgument, "invalid CS-LBP parameters");
  }
}

inline int cslbp_bins(const CslbpParams& p) { return 1 << (p.neighbors / 2); }

inline std::size_t descriptor_length(const CslbpParams& p) {
  return static_cast<std::size_t>(p.grid) * p.grid * cslbp_bins(p);
}

namespace detail {

struct CircleOffsets {
  std::vector<double> dx;
  std::vector<double> dy;
};

inline CircleOffsets circle_offsets(const CslbpParams& p) {
  CircleOffsets out;
  for (int i = 0; i < p.neighbors; ++i) {
    const double a = 2.0 * std::numbers::pi * i / p.neighbors;
    double dx = p.radius * std::cos(a);
    double dy = -p.radius * std::sin(a);
    // Keep axis-aligned samples exactly on the pixel grid.
    if (std::abs(dx - std::round(dx)) < 1e-9) dx = std::round(dx);
    if (std::abs(dy - std::round(dy)) < 1e-9) dy = std::round(dy);
    out.dx.push_back(dx);
    out.dy.push_back(dy);
  }
  return out;
}

inline unsigned code_at(const GrayImage& img, int cx, int cy, const CircleOffsets& circle,
                        const CslbpParams& p) {
  const int half = p.neighbors / 2;
  unsigned code = 0;
  for (int i = 0; i < half; ++i) {
    const double gi = sample_bilinear(img, cx + circle.dx[i], cy + circle.dy[i]);
    const double gj = sample_bilinear(img, cx + circle.dx[i + half], cy + circle.dy[i + half]);
    if (gi - gj > p.threshold) code |= 1u << i;
  }
  return code;
}

}  // namespace detail

/// Centre-symmetric LBP code at an integer pixel: bit i is set when
/// g_i - g_{i+p/2} exceeds the threshold, the p samples lying equally spaced
/// on the radius-r circle.
inline unsigned cslbp_code(const GrayImage& img, int cx, int cy, const CslbpParams& p = {}) {
  validate(p);
  if (cx - p.radius < 0.0 || cy - p.radius < 0.0 || cx + p.radius > img.width() - 1 ||
      cy + p.radius > img.height() - 1) {
    throw Error(ErrorCode::OutOfBounds, "CS-LBP circle exits the patch");
  }
  return detail::code_at(img, cx, cy, detail::circle_offsets(p), p);
}

/// Side length of the measurement region around a keypoint.
inline double region_side(const Keypoint& kp, const CslbpParams& p) {
  return std::max(p.min_region, p.region_scale * kp.sigma);
}

/// The region resampled onto a (patch_size + 2 margin)^2 grid, margin =
/// ceil(radius) so every coded pixel has its full circle.
inline GrayImage canonical_patch(const GrayImage& img, const Keypoint& kp, const CslbpParams& p) {
  validate(p);
  const int margin = static_cast<int>(std::ceil(p.radius));
  const int side = p.patch_size + 2 * margin;
  const double step = region_side(kp, p) / p.patch_size;
  const double x_min = kp.x + (-margin + 0.5 - 0.5 * p.patch_size) * step - 0.5 * step;
  const double x_max = kp.x + (p.patch_size + margin - 0.5 - 0.5 * p.patch_size) * step + 0.5 * step;
  const double y_min = kp.y + (-margin + 0.5 - 0.5 * p.patch_size) * step - 0.5 * step;
  const double y_max = kp.y + (p.patch_size + margin - 0.5 - 0.5 * p.patch_size) * step + 0.5 * step;
  if (x_min < 0.0 || y_min < 0.0 || x_max > img.width() - 1 || y_max > img.height() - 1) {
    throw Error(ErrorCode::RegionOutOfBounds, "keypoint measurement region exits the image");
  }
  // Box-filtered resampling: n x n bilinear taps spread over each sample's footprint.
  const int taps = std::max(1, static_cast<int>(std::ceil(step)));
  GrayImage patch(side, side, 1);
  for (int v = 0; v < side; ++v) {
    for (int u = 0; u < side; ++u) {
      const double cx = kp.x + (u - margin + 0.5 - 0.5 * p.patch_size) * step;
      const double cy = kp.y + (v - margin + 0.5 - 0.5 * p.patch_size) * step;
      double acc = 0.0;
      for (int j = 0; j < taps; ++j)
        for (int i = 0; i < taps; ++i) {
          const double ox = taps == 1 ? 0.0 : ((i + 0.5) / taps - 0.5) * step;
          const double oy = taps == 1 ? 0.0 : ((j + 0.5) / taps - 0.5) * step;
          acc += sample_bilinear(img, cx + ox, cy + oy);
        }
      patch.at(u, v) = acc / (taps * taps);
    }
  }
  return patch;
}

/// Raw (unnormalized) grid histogram of CS-LBP codes over a canonical patch.
/// Layout: cell-major (row, col), then code. Every coded pixel votes weight 1.
inline std::vector<double> cslbp_histogram_of_patch(const GrayImage& patch, const CslbpParams& p) {
  validate(p);
  const int margin = static_cast<int>(std::ceil(p.radius));
  const int bins = cslbp_bins(p);
  const double cell = static_cast<double>(p.patch_size) / p.grid;
  const auto circle = detail::circle_offsets(p);
  std::vector<double> hist(descriptor_length(p), 0.0);

  auto cell_weights = [&](int u, int& c0, int& c1, double& w1) {
    if (!p.vote_sharing) {
      c0 = c1 = std::min(p.grid - 1, static_cast<int>((u + 0.5) / cell));
      w1 = 0.0;
      return;
    }
    const double pos = (u + 0.5) / cell - 0.5;
    const int base = static_cast<int>(std::floor(pos));
    w1 = pos - base;
    c0 = std::clamp(base, 0, p.grid - 1);
    c1 = std::clamp(base + 1, 0, p.grid - 1);
  };

  for (int v = 0; v < p.patch_size; ++v) {
    int r0, r1;
    double wr;
    cell_weights(v, r0, r1, wr);
    for (int u = 0; u < p.patch_size; ++u) {
      int k0, k1;
      double wc;
      cell_weights(u, k0, k1, wc);
      const unsigned code = detail::code_at(patch, u + margin, v + margin, circle, p);
      hist[(r0 * p.grid + k0) * bins + code] += (1.0 - wr) * (1.0 - wc);
      hist[(r0 * p.grid + k1) * bins + code] += (1.0 - wr) * wc;
      hist[(r1 * p.grid + k0) * bins + code] += wr * (1.0 - wc);
      hist[(r1 * p.grid + k1) * bins + code] += wr * wc;
    }
  }
  return hist;
}

inline std::vector<double> cslbp_histogram(const GrayImage& img, const Keypoint& kp,
                                           const CslbpParams& p = {}) {
  return cslbp_histogram_of_patch(canonical_patch(img, kp, p), p);
}

/// L2 normalize, clip at `clip`, renormalize. A zero histogram stays zero.
inline std::vector<float> normalize_descriptor(const std::vector<double>& hist, double clip) {
  std::vector<double> v = hist;
  auto renorm = [&v] {
    double ss = 0.0;
    for (double x : v) ss += x * x;
    if (ss <= 0.0) return;
    const double inv = 1.0 / std::sqrt(ss);
    for (double& x : v) x *= inv;
  };
  renorm();
  for (double& x : v) x = std::min(x, clip);
  renorm();
  return {v.begin(), v.end()};
}

inline Descriptor describe(const GrayImage& img, const Keypoint& kp, const CslbpParams& p = {}) {
  return Descriptor{normalize_descriptor(cslbp_histogram(img, kp, p), p.clip), kp};
}

/// Describes every keypoint whose region fits; the rest are skipped.
inline std::vector<Descriptor> describe_all(const GrayImage& img, const std::vector<Keypoint>& kps,
                                            const CslbpParams& p = {}) {
  std::vector<Descriptor> out;
  out.reserve(kps.size());
  for (const auto& kp : kps) {
    try {
      out.push_back(describe(img, kp, p));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RegionOutOfBounds) throw;
    }
  }
  return out;
}

}  // namespace mosaic
