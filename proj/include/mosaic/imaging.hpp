#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mosaic/homography.hpp"
#include "mosaic/image.hpp"

namespace mosaic {

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline GrayImage to_grayscale(const Rgb8Image& rgb) {
  GrayImage out(rgb.width(), rgb.height(), 1);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      const double v =
          (kLumaR * rgb.at(x, y, 0) + kLumaG * rgb.at(x, y, 1) + kLumaB * rgb.at(x, y, 2)) / 255.0;
      out.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

inline GrayImage to_grayscale(const Frame& f) { return to_grayscale(f.rgb); }

/// Luma of a real RGB raster; values are not clamped so signed inputs survive.
inline GrayImage to_grayscale(const RealImage& rgb) {
  if (rgb.channels() == 1) return rgb;
  GrayImage out(rgb.width(), rgb.height(), 1);
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x)
      out.at(x, y) = kLumaR * rgb.at(x, y, 0) + kLumaG * rgb.at(x, y, 1) + kLumaB * rgb.at(x, y, 2);
  return out;
}

using Mask = Image<std::uint8_t>;

struct WarpResult {
  RealImage image;
  Mask mask;  // 1 where the source was sampled entirely in-bounds
};

struct CanvasSize {
  int width = 0;
  int height = 0;
};

/// Inverse-mapped bilinear warp. Output pixel (x,y) samples the source at
/// h^-1 (x,y,1); samples whose bilinear support leaves the source get `fill`.
template <typename T>
WarpResult warp_perspective(const Image<T>& src, const Homography& h, CanvasSize canvas,
                            double fill = 0.0) {
  if (canvas.width < 1 || canvas.height < 1) {
    throw Error(ErrorCode::InvalidArgument, "canvas dimensions must be positive");
  }
  const Homography inv = h.inverse();
  const Eigen::Matrix3d& m = inv.matrix();
  const int channels = src.channels();
  WarpResult out{RealImage(canvas.width, canvas.height, channels, fill),
                 Mask(canvas.width, canvas.height, 1, 0)};
  // Snap sample coordinates that are integral up to rounding noise so exact
  // integer warps reproduce the source bit-for-bit.
  constexpr double kSnap = 1e-9;
  const double max_x = src.width() - 1;
  const double max_y = src.height() - 1;
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
      if (w <= 0.0) continue;
      double sx = (m(0, 0) * x + m(0, 1) * y + m(0, 2)) / w;
      double sy = (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / w;
      if (std::abs(sx - std::round(sx)) < kSnap) sx = std::round(sx);
      if (std::abs(sy - std::round(sy)) < kSnap) sy = std::round(sy);
      if (!(sx >= 0.0 && sy >= 0.0 && sx <= max_x && sy <= max_y)) continue;
      for (int c = 0; c < channels; ++c) out.image.at(x, y, c) = sample_bilinear(src, sx, sy, c);
      out.mask.at(x, y) = 1;
    }
  }
  return out;
}

/// Frames are warped in [0,1] units.
inline WarpResult warp_perspective(const Frame& f, const Homography& h, CanvasSize canvas,
                                   double fill = 0.0) {
  return warp_perspective(to_real(f.rgb), h, canvas, fill);
}

/// Normalized 1-D Gaussian taps with radius ceil(4 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Separable convolution with a symmetric odd-length kernel, edge replication.
inline RealImage convolve_separable(const RealImage& src, const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = src.width();
  const int h = src.height();
  const int ch = src.channels();
  RealImage tmp(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * src.clamped(x + k, y, c);
        tmp.at(x, y, c) = acc;
      }
  RealImage out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp.clamped(x, y + k, c);
        out.at(x, y, c) = acc;
      }
  return out;
}

inline RealImage gaussian_blur(const RealImage& src, double sigma) {
  if (sigma <= 0.0) return src;
  return convolve_separable(src, gaussian_kernel(sigma));
}

}  // namespace mosaic
