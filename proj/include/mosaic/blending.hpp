#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "mosaic/imaging.hpp"

namespace mosaic {

enum class PyramidKind { Gaussian, Laplacian };

struct Pyramid {
  PyramidKind kind = PyramidKind::Gaussian;
  std::vector<RealImage> levels;

  std::size_t size() const noexcept { return levels.size(); }
  const RealImage& operator[](std::size_t k) const { return levels[k]; }
};

namespace detail {

// Burt-Adelson binomial taps [1 4 6 4 1] / 16.
inline constexpr std::array<double, 5> kBinomial{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

inline int half_ceil(int n) { return (n + 1) / 2; }

}  // namespace detail

/// Blur with the binomial kernel (edge replication) and keep even samples.
inline RealImage pyr_reduce(const RealImage& src) {
  const int w = detail::half_ceil(src.width());
  const int h = detail::half_ceil(src.height());
  const int ch = src.channels();
  RealImage tmp(w, src.height(), ch);
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -2; k <= 2; ++k) acc += detail::kBinomial[k + 2] * src.clamped(2 * x + k, y, c);
        tmp.at(x, y, c) = acc;
      }
  RealImage out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -2; k <= 2; ++k) acc += detail::kBinomial[k + 2] * tmp.clamped(x, 2 * y + k, c);
        out.at(x, y, c) = acc;
      }
  return out;
}

/// Upsample to (width, height): out(i) = sum_j 2 w(i - 2j) in(j), coarse
/// indices replicated at the edges. Weights sum to 1 at every output pixel.
inline RealImage pyr_expand(const RealImage& src, int width, int height) {
  const int ch = src.channels();
  auto expand_index = [](int i, auto&& fn) {
    const int lo = (i - 2 + 1) >> 1;  // ceil((i-2)/2)
    for (int j = lo; 2 * j <= i + 2; ++j) fn(j, 2.0 * detail::kBinomial[i - 2 * j + 2]);
  };
  RealImage tmp(width, src.height(), ch);
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        expand_index(x, [&](int j, double wgt) { acc += wgt * src.clamped(j, y, c); });
        tmp.at(x, y, c) = acc;
      }
  RealImage out(width, height, ch);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        expand_index(y, [&](int j, double wgt) { acc += wgt * tmp.clamped(x, j, c); });
        out.at(x, y, c) = acc;
      }
  return out;
}

/// Largest level count whose coarsest level is still at least 2x2.
inline int max_pyramid_levels(int width, int height) {
  int levels = 1;
  while (true) {
    width = detail::half_ceil(width);
    height = detail::half_ceil(height);
    if (width < 2 || height < 2) return levels;
    ++levels;
  }
}

/// floor(log2(min(w,h) / min_size)) + 1: levels until the coarsest side
/// would drop below min_size.
inline int levels_for_min_size(int width, int height, int min_size) {
  const double ratio = static_cast<double>(std::min(width, height)) / min_size;
  if (ratio < 1.0) return 1;
  return static_cast<int>(std::floor(std::log2(ratio))) + 1;
}

namespace detail {

inline void check_levels(const RealImage& img, int n_levels) {
  if (n_levels < 1) throw Error(ErrorCode::InvalidArgument, "n_levels must be >= 1");
  if (img.width() < 2 || img.height() < 2 || n_levels > max_pyramid_levels(img.width(), img.height())) {
    throw Error(ErrorCode::TooManyLevels, std::to_string(n_levels) + " levels on " +
                                              std::to_string(img.width()) + "x" +
                                              std::to_string(img.height()));
  }
}

inline RealImage add(const RealImage& a, const RealImage& b, double sign = 1.0) {
  RealImage out(a.width(), a.height(), a.channels());
  auto pa = a.data();
  auto pb = b.data();
  auto po = out.data();
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] + sign * pb[i];
  return out;
}

}  // namespace detail

inline Pyramid build_gaussian_pyramid(const RealImage& img, int n_levels) {
  detail::check_levels(img, n_levels);
  Pyramid p{PyramidKind::Gaussian, {img}};
  for (int k = 1; k < n_levels; ++k) p.levels.push_back(pyr_reduce(p.levels.back()));
  return p;
}

/// L_k = G_k - expand(G_{k+1}); the last level is the Gaussian residual.
inline Pyramid build_laplacian_pyramid(const RealImage& img, int n_levels) {
  Pyramid g = build_gaussian_pyramid(img, n_levels);
  Pyramid l{PyramidKind::Laplacian, {}};
  for (int k = 0; k + 1 < n_levels; ++k) {
    const RealImage up = pyr_expand(g[k + 1], g[k].width(), g[k].height());
    l.levels.push_back(detail::add(g[k], up, -1.0));
  }
  l.levels.push_back(g.levels.back());
  return l;
}

inline RealImage collapse(const Pyramid& lap) {
  if (lap.kind != PyramidKind::Laplacian || lap.levels.empty()) {
    throw Error(ErrorCode::InvalidArgument, "collapse needs a non-empty Laplacian pyramid");
  }
  RealImage acc = lap.levels.back();
  for (std::size_t k = lap.size() - 1; k-- > 0;) {
    acc = detail::add(lap[k], pyr_expand(acc, lap[k].width(), lap[k].height()));
  }
  return acc;
}

/// Per level L_k = P1_k G_k + P2_k (1 - G_k) with G the mask's Gaussian
/// pyramid, then collapse. Mask weights select img1; mask is single channel.
inline RealImage blend_multiband(const RealImage& img1, const RealImage& img2, const GrayImage& mask,
                                 int n_levels) {
  if (!img1.same_shape(img2) || mask.width() != img1.width() || mask.height() != img1.height() ||
      mask.channels() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "blend inputs differ in size");
  }
  const Pyramid p1 = build_laplacian_pyramid(img1, n_levels);
  const Pyramid p2 = build_laplacian_pyramid(img2, n_levels);
  const Pyramid gm = build_gaussian_pyramid(mask, n_levels);
  Pyramid combined{PyramidKind::Laplacian, {}};
  for (int k = 0; k < n_levels; ++k) {
    RealImage level(p1[k].width(), p1[k].height(), p1[k].channels());
    for (int y = 0; y < level.height(); ++y)
      for (int x = 0; x < level.width(); ++x) {
        const double g = gm[k].at(x, y);
        for (int c = 0; c < level.channels(); ++c)
          level.at(x, y, c) = p1[k].at(x, y, c) * g + p2[k].at(x, y, c) * (1.0 - g);
      }
    combined.levels.push_back(std::move(level));
  }
  return collapse(combined);
}

/// Hard-mask composite: img1 where mask >= 0.5, otherwise img2.
inline RealImage blend_hard(const RealImage& img1, const RealImage& img2, const GrayImage& mask) {
  if (!img1.same_shape(img2) || mask.width() != img1.width() || mask.height() != img1.height()) {
    throw Error(ErrorCode::DimensionMismatch, "blend inputs differ in size");
  }
  RealImage out = img2;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (mask.at(x, y) >= 0.5)
        for (int c = 0; c < out.channels(); ++c) out.at(x, y, c) = img1.at(x, y, c);
  return out;
}

namespace detail {

// Felzenszwalb-Huttenlocher 1-D squared distance transform.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    auto intersect = [&](int p) {
      return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
    };
    double s = intersect(v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = (double(q) - v[k]) * (double(q) - v[k]) + f[v[k]];
  }
}

}  // namespace detail

/// Euclidean distance from each covered pixel to the nearest uncovered one;
/// everything outside the raster counts as uncovered. Uncovered pixels get 0.
inline GrayImage distance_to_border(const Image<std::uint8_t>& coverage) {
  const int w = coverage.width() + 2;
  const int h = coverage.height() + 2;
  constexpr double kInf = 1e20;
  std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < coverage.height(); ++y)
    for (int x = 0; x < coverage.width(); ++x)
      if (coverage.at(x, y)) grid[static_cast<std::size_t>(y + 1) * w + x + 1] = kInf;

  std::vector<double> f, d;
  f.resize(h);
  d.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    detail::edt_1d(f, d);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
    detail::edt_1d(f, d);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
  }
  GrayImage out(coverage.width(), coverage.height(), 1);
  for (int y = 0; y < coverage.height(); ++y)
    for (int x = 0; x < coverage.width(); ++x)
      out.at(x, y) = std::sqrt(grid[static_cast<std::size_t>(y + 1) * w + x + 1]);
  return out;
}

/// Seam mask for a pair: 1 where only image 1 is defined, 0 where only image 2
/// is, and where both are, 1 iff image 1's border is farther away.
inline GrayImage pair_blend_mask(const Image<std::uint8_t>& cov1, const Image<std::uint8_t>& cov2) {
  if (!cov1.same_shape(cov2)) throw Error(ErrorCode::DimensionMismatch, "coverage masks differ");
  const GrayImage d1 = distance_to_border(cov1);
  const GrayImage d2 = distance_to_border(cov2);
  GrayImage mask(cov1.width(), cov1.height(), 1, 0.0);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      const bool a = cov1.at(x, y) != 0;
      const bool b = cov2.at(x, y) != 0;
      if (a && !b) mask.at(x, y) = 1.0;
      else if (a && b) mask.at(x, y) = d1.at(x, y) > d2.at(x, y) ? 1.0 : 0.0;
    }
  return mask;
}

/// floor(log2(min(overlap_w, overlap_h))) - 2 clamped to [2,6].
inline int default_blend_levels(int overlap_width, int overlap_height) {
  const int m = std::max(1, std::min(overlap_width, overlap_height));
  const int n = static_cast<int>(std::floor(std::log2(static_cast<double>(m)))) - 2;
  return std::clamp(n, 2, 6);
}

}  // namespace mosaic
