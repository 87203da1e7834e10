#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "mosaic/imaging.hpp"

namespace mosaic {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;     // characteristic scale, original-image pixels
  double response = 0.0; // interpolated DoG value at the extremum
  int octave = 0;
  int layer = 0;
};

struct ScaleSpaceConfig {
  int octaves = 0;  // 0: floor(log2(min_dim)) - 3, at least 1
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  double input_sigma = 0.5;  // blur already present in the input
  double contrast_threshold = 0.03;
  double edge_ratio_threshold = 10.0;
  int max_keypoints = 1000;
  double border_sigmas = 3.0;
};

inline constexpr int kMinDetectDimension = 32;

namespace detail {

inline RealImage downsample_half(const RealImage& img) {
  const int w = (img.width() + 1) / 2;
  const int h = (img.height() + 1) / 2;
  RealImage out(w, h, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(2 * x, 2 * y, c);
  return out;
}

inline RealImage subtract(const RealImage& a, const RealImage& b) {
  RealImage out(a.width(), a.height(), a.channels());
  auto pa = a.data();
  auto pb = b.data();
  auto po = out.data();
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] - pb[i];
  return out;
}

inline bool is_extremum(const std::vector<RealImage>& dog, int s, int x, int y) {
  const double v = dog[s].at(x, y);
  bool is_max = true;
  bool is_min = true;
  for (int ds = -1; ds <= 1; ++ds)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (ds == 0 && dy == 0 && dx == 0) continue;
        const double n = dog[s + ds].at(x + dx, y + dy);
        if (n >= v) is_max = false;
        if (n <= v) is_min = false;
        if (!is_max && !is_min) return false;
      }
  return true;
}

}  // namespace detail

/// Gaussian scale space: per octave, scales_per_octave + 3 blurred images.
struct ScaleSpace {
  std::vector<std::vector<RealImage>> gaussians;
  std::vector<std::vector<RealImage>> dogs;
};

inline int resolve_octaves(const ScaleSpaceConfig& cfg, int width, int height) {
  if (cfg.octaves > 0) return cfg.octaves;
  const int min_dim = std::min(width, height);
  return std::max(1, static_cast<int>(std::floor(std::log2(static_cast<double>(min_dim)))) - 3);
}

inline ScaleSpace build_scale_space(const GrayImage& img, const ScaleSpaceConfig& cfg) {
  const int S = cfg.scales_per_octave;
  const int octaves = resolve_octaves(cfg, img.width(), img.height());
  const double k = std::pow(2.0, 1.0 / S);

  // Incremental blur taking layer s-1 (sigma_{s-1}) to layer s (sigma_s).
  std::vector<double> increments(S + 3, 0.0);
  for (int s = 1; s < S + 3; ++s) {
    const double prev = cfg.base_sigma * std::pow(k, s - 1);
    const double next = prev * k;
    increments[s] = std::sqrt(next * next - prev * prev);
  }

  ScaleSpace space;
  RealImage base = gaussian_blur(
      img, std::sqrt(std::max(0.0, cfg.base_sigma * cfg.base_sigma - cfg.input_sigma * cfg.input_sigma)));
  for (int o = 0; o < octaves; ++o) {
    std::vector<RealImage> gauss;
    gauss.reserve(S + 3);
    gauss.push_back(base);
    for (int s = 1; s < S + 3; ++s) gauss.push_back(gaussian_blur(gauss.back(), increments[s]));
    std::vector<RealImage> dog;
    for (int s = 0; s + 1 < S + 3; ++s) dog.push_back(detail::subtract(gauss[s + 1], gauss[s]));
    if (o + 1 < octaves) {
      base = detail::downsample_half(gauss[S]);
      if (base.width() < 4 || base.height() < 4) {
        space.gaussians.push_back(std::move(gauss));
        space.dogs.push_back(std::move(dog));
        break;
      }
    }
    space.gaussians.push_back(std::move(gauss));
    space.dogs.push_back(std::move(dog));
  }
  return space;
}

/// DoG extrema over 3x3x3 neighbourhoods with quadratic sub-pixel/sub-scale
/// refinement, contrast and edge-ratio rejection. Output is sorted by
/// descending |response| and capped at max_keypoints.
inline std::vector<Keypoint> detect_keypoints(const GrayImage& img, const ScaleSpaceConfig& cfg = {}) {
  if (std::min(img.width(), img.height()) < kMinDetectDimension) {
    throw Error(ErrorCode::ImageTooSmall, "detection needs min dimension >= 32");
  }
  if (cfg.scales_per_octave < 1 || cfg.octaves < 0 || cfg.contrast_threshold <= 0.0 ||
      cfg.edge_ratio_threshold <= 0.0 || cfg.base_sigma <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid scale-space configuration");
  }
  const int S = cfg.scales_per_octave;
  const double k = std::pow(2.0, 1.0 / S);
  const ScaleSpace space = build_scale_space(img, cfg);
  const double edge_limit =
      (cfg.edge_ratio_threshold + 1.0) * (cfg.edge_ratio_threshold + 1.0) / cfg.edge_ratio_threshold;

  std::vector<Keypoint> kps;
  for (std::size_t o = 0; o < space.dogs.size(); ++o) {
    const auto& dog = space.dogs[o];
    const int w = dog[0].width();
    const int h = dog[0].height();
    if (w < 3 || h < 3) continue;
    for (int s = 1; s <= S; ++s) {
      for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
          if (std::abs(dog[s].at(x, y)) < 0.5 * cfg.contrast_threshold) continue;
          if (!detail::is_extremum(dog, s, x, y)) continue;

          int xi = x, yi = y, si = s;
          Eigen::Vector3d offset = Eigen::Vector3d::Zero();
          Eigen::Vector3d grad;
          bool converged = false;
          for (int iter = 0; iter < 5; ++iter) {
            const auto& d0 = dog[si];
            const auto& dm = dog[si - 1];
            const auto& dp = dog[si + 1];
            const double v = d0.at(xi, yi);
            grad << 0.5 * (d0.at(xi + 1, yi) - d0.at(xi - 1, yi)),
                0.5 * (d0.at(xi, yi + 1) - d0.at(xi, yi - 1)), 0.5 * (dp.at(xi, yi) - dm.at(xi, yi));
            Eigen::Matrix3d hess;
            const double dxx = d0.at(xi + 1, yi) + d0.at(xi - 1, yi) - 2 * v;
            const double dyy = d0.at(xi, yi + 1) + d0.at(xi, yi - 1) - 2 * v;
            const double dss = dp.at(xi, yi) + dm.at(xi, yi) - 2 * v;
            const double dxy = 0.25 * (d0.at(xi + 1, yi + 1) - d0.at(xi - 1, yi + 1) -
                                       d0.at(xi + 1, yi - 1) + d0.at(xi - 1, yi - 1));
            const double dxs = 0.25 * (dp.at(xi + 1, yi) - dp.at(xi - 1, yi) - dm.at(xi + 1, yi) +
                                       dm.at(xi - 1, yi));
            const double dys = 0.25 * (dp.at(xi, yi + 1) - dp.at(xi, yi - 1) - dm.at(xi, yi + 1) +
                                       dm.at(xi, yi - 1));
            hess << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
            if (std::abs(hess.determinant()) < 1e-18) break;
            offset = -hess.inverse() * grad;
            if (std::abs(offset(0)) < 0.5 && std::abs(offset(1)) < 0.5 && std::abs(offset(2)) < 0.5) {
              converged = true;
              break;
            }
            xi += static_cast<int>(std::lround(offset(0)));
            yi += static_cast<int>(std::lround(offset(1)));
            si += static_cast<int>(std::lround(offset(2)));
            if (si < 1 || si > S || xi < 1 || yi < 1 || xi >= w - 1 || yi >= h - 1) break;
          }
          if (!converged) continue;

          const auto& d0 = dog[si];
          const double response = d0.at(xi, yi) + 0.5 * grad.dot(offset);
          if (std::abs(response) < cfg.contrast_threshold) continue;

          const double v = d0.at(xi, yi);
          const double dxx = d0.at(xi + 1, yi) + d0.at(xi - 1, yi) - 2 * v;
          const double dyy = d0.at(xi, yi + 1) + d0.at(xi, yi - 1) - 2 * v;
          const double dxy = 0.25 * (d0.at(xi + 1, yi + 1) - d0.at(xi - 1, yi + 1) -
                                     d0.at(xi + 1, yi - 1) + d0.at(xi - 1, yi - 1));
          const double tr = dxx + dyy;
          const double det = dxx * dyy - dxy * dxy;
          if (det <= 0.0 || tr * tr / det >= edge_limit) continue;

          const double scale = std::ldexp(1.0, static_cast<int>(o));
          Keypoint kp;
          kp.x = (xi + offset(0)) * scale;
          kp.y = (yi + offset(1)) * scale;
          // Layer pair (sigma_s, k sigma_s) is centred on sigma_s * sqrt(k).
          kp.sigma = cfg.base_sigma * std::pow(k, si + offset(2)) * std::sqrt(k) * scale;
          kp.response = response;
          kp.octave = static_cast<int>(o);
          kp.layer = si;
          const double margin = cfg.border_sigmas * kp.sigma;
          if (kp.x < margin || kp.y < margin || kp.x > img.width() - 1 - margin ||
              kp.y > img.height() - 1 - margin) {
            continue;
          }
          kps.push_back(kp);
        }
      }
    }
  }

  // Refinement can land two seeds on the same extremum.
  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    return std::tie(a.octave, a.layer, a.y, a.x) < std::tie(b.octave, b.layer, b.y, b.x);
  });
  kps.erase(std::unique(kps.begin(), kps.end(),
                        [](const Keypoint& a, const Keypoint& b) {
                          return a.octave == b.octave && a.layer == b.layer && a.x == b.x && a.y == b.y;
                        }),
            kps.end());

  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    const double ra = std::abs(a.response);
    const double rb = std::abs(b.response);
    if (ra != rb) return ra > rb;
    return std::tie(a.y, a.x, a.sigma) < std::tie(b.y, b.x, b.sigma);
  });
  if (cfg.max_keypoints > 0 && kps.size() > static_cast<std::size_t>(cfg.max_keypoints)) {
    kps.resize(static_cast<std::size_t>(cfg.max_keypoints));
  }
  return kps;
}

}  // namespace mosaic
