#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mosaic/cslbp.hpp"
#include "mosaic/homography.hpp"

namespace mosaic {

struct Match {
  std::size_t query_idx = 0;
  std::size_t train_idx = 0;
  double distance = 0.0;
  double ratio = 0.0;
};

inline double l2_distance(std::span<const float> a, std::span<const float> b) {
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    ss += d * d;
  }
  return std::sqrt(ss);
}

/// Brute-force nearest-neighbour distance ratio matching with a
/// mutual-uniqueness pass on train indices. Needs at least two train
/// descriptors; a 0/0 ratio counts as 1.
inline std::vector<Match> match_nndr(std::span<const Descriptor> query, std::span<const Descriptor> train,
                                     double ratio_threshold = 0.8) {
  std::vector<Match> candidates;
  if (query.empty() || train.size() < 2) return candidates;
  const std::size_t len = query.front().values.size();
  for (const auto& d : query)
    if (d.values.size() != len) throw Error(ErrorCode::DimensionMismatch, "descriptor lengths differ");
  for (const auto& d : train)
    if (d.values.size() != len) throw Error(ErrorCode::DimensionMismatch, "descriptor lengths differ");

  for (std::size_t q = 0; q < query.size(); ++q) {
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t t = 0; t < train.size(); ++t) {
      const double d = l2_distance(query[q].values, train[t].values);
      if (d < d1) {
        d2 = d1;
        d1 = d;
        best = t;
      } else if (d < d2) {
        d2 = d;
      }
    }
    const double ratio = d2 > 0.0 ? d1 / d2 : 1.0;
    if (ratio < ratio_threshold) candidates.push_back({q, best, d1, ratio});
  }

  // Keep the smallest-distance match per train index (earliest query on ties).
  std::vector<std::optional<std::size_t>> owner(train.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& slot = owner[candidates[i].train_idx];
    if (!slot || candidates[i].distance < candidates[*slot].distance) slot = i;
  }
  std::vector<Match> out;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (owner[candidates[i].train_idx] == i) out.push_back(candidates[i]);
  return out;
}

struct RansacConfig {
  double success_prob = 0.99;
  int sample_size = 4;
  double assumed_outlier_ratio = 0.5;
  double inlier_threshold = 3.0;
  int max_iterations = 2000;
  std::uint64_t rng_seed = 42;
};

/// N = ceil(log(1-p) / log(1-(1-v)^m)), 1 when v = 0, capped at max_iterations.
inline int ransac_iterations(double success_prob, double outlier_ratio, int sample_size,
                             int max_iterations) {
  if (!(success_prob > 0.0 && success_prob < 1.0) || outlier_ratio < 0.0 || outlier_ratio >= 1.0 ||
      sample_size < 1 || max_iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid RANSAC iteration parameters");
  }
  if (outlier_ratio == 0.0) return 1;
  const double all_inlier = std::pow(1.0 - outlier_ratio, sample_size);
  const double denom = std::log1p(-all_inlier);
  if (!(denom < 0.0)) return max_iterations;
  const double n = std::ceil(std::log1p(-success_prob) / denom);
  if (!std::isfinite(n) || n >= max_iterations) return max_iterations;
  return std::max(1, static_cast<int>(n));
}

inline int ransac_iterations(const RansacConfig& cfg) {
  return ransac_iterations(cfg.success_prob, cfg.assumed_outlier_ratio, cfg.sample_size,
                           cfg.max_iterations);
}

struct RegistrationResult {
  Homography homography;  // maps query points onto train points
  std::vector<bool> inlier_mask;
  int iterations_used = 0;
  double mean_reproj_error = 0.0;

  std::size_t inlier_count() const {
    return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
  }
};

namespace detail {

inline Eigen::Matrix3d hartley_normalization(std::span<const Point2> pts) {
  double cx = 0.0, cy = 0.0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= pts.size();
  cy /= pts.size();
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= pts.size();
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

}  // namespace detail

/// Normalized direct linear transform: exact for 4 points, least squares
/// beyond. Returns nothing when the fit is singular.
inline std::optional<Homography> fit_homography_dlt(std::span<const Point2> src, std::span<const Point2> dst) {
  if (src.size() != dst.size() || src.size() < 4) {
    throw Error(ErrorCode::InsufficientMatches, "DLT needs >= 4 correspondences");
  }
  const Eigen::Matrix3d ts = detail::hartley_normalization(src);
  const Eigen::Matrix3d td = detail::hartley_normalization(dst);
  const auto n = static_cast<Eigen::Index>(src.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
    const Eigen::Vector3d q = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
    const double x = p.x() / p.z(), y = p.y() / p.z();
    const double u = q.x() / q.z(), v = q.y() / q.z();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d m = td.inverse() * hn * ts;
  if (!std::isfinite(m.sum()) || std::abs(m(2, 2)) < 1e-12) return std::nullopt;
  try {
    return Homography(m);
  } catch (const Error&) {
    return std::nullopt;
  }
}

/// RMS of forward and backward transfer distances.
inline double symmetric_transfer_error(const Homography& h, const Homography& h_inv, const Point2& q,
                                       const Point2& t) {
  const Point2 fwd = h.apply(q);
  const Point2 bwd = h_inv.apply(t);
  const double e1 = (fwd.x - t.x) * (fwd.x - t.x) + (fwd.y - t.y) * (fwd.y - t.y);
  const double e2 = (bwd.x - q.x) * (bwd.x - q.x) + (bwd.y - q.y) * (bwd.y - q.y);
  const double e = std::sqrt(0.5 * (e1 + e2));
  return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

/// True when some three of the points lie within `tol` px of a common line.
inline bool has_collinear_triple(std::span<const Point2> pts, double tol = 1.0) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const Point2 &a = pts[i], &b = pts[j], &c = pts[k];
        const double cross = std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
        const double longest = std::max({distance(a, b), distance(b, c), distance(a, c)});
        if (longest < tol || cross / longest < tol) return true;
      }
  return false;
}

namespace detail {

struct Consensus {
  std::vector<bool> mask;
  std::size_t count = 0;
  double error_sum = 0.0;
};

inline Consensus score(const Homography& h, std::span<const Point2> q, std::span<const Point2> t,
                       double threshold) {
  Consensus c;
  c.mask.assign(q.size(), false);
  Homography h_inv;
  try {
    h_inv = h.inverse();
  } catch (const Error&) {
    return c;
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double e = symmetric_transfer_error(h, h_inv, q[i], t[i]);
    if (e < threshold) {
      c.mask[i] = true;
      ++c.count;
      c.error_sum += e;
    }
  }
  return c;
}

}  // namespace detail

/// RANSAC homography over matched keypoint locations. The iteration budget
/// follows ransac_iterations() and is recomputed from the best inlier ratio
/// each time the consensus improves; the winner is refit on all its inliers.
inline RegistrationResult estimate_homography(std::span<const Match> matches,
                                              std::span<const Point2> pts_query,
                                              std::span<const Point2> pts_train,
                                              const RansacConfig& cfg = {}) {
  if (cfg.sample_size != 4 || cfg.inlier_threshold <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "homography RANSAC needs sample_size 4 and threshold > 0");
  }
  const std::size_t n = matches.size();
  if (n < 4) throw Error(ErrorCode::InsufficientMatches, std::to_string(n) + " matches, need 4");

  std::vector<Point2> q(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (matches[i].query_idx >= pts_query.size() || matches[i].train_idx >= pts_train.size()) {
      throw Error(ErrorCode::InvalidArgument, "match index outside point list");
    }
    q[i] = pts_query[matches[i].query_idx];
    t[i] = pts_train[matches[i].train_idx];
  }

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  int budget = ransac_iterations(cfg);
  int iter = 0;
  std::optional<Homography> best_model;
  detail::Consensus best;

  std::array<std::size_t, 4> idx{};
  std::array<Point2, 4> sq{}, st{};
  for (; iter < budget && iter < cfg.max_iterations; ++iter) {
    for (int s = 0; s < 4; ++s) {
      std::size_t cand;
      do {
        cand = pick(rng);
      } while (std::find(idx.begin(), idx.begin() + s, cand) != idx.begin() + s);
      idx[s] = cand;
      sq[s] = q[cand];
      st[s] = t[cand];
    }
    if (has_collinear_triple(sq) || has_collinear_triple(st)) continue;
    const auto model = fit_homography_dlt(sq, st);
    if (!model) continue;
    auto consensus = detail::score(*model, q, t, cfg.inlier_threshold);
    if (consensus.count > best.count) {
      best = std::move(consensus);
      best_model = model;
      const double outliers = 1.0 - static_cast<double>(best.count) / n;
      budget = ransac_iterations(cfg.success_prob, outliers, 4, cfg.max_iterations);
    }
  }

  if (!best_model || best.count < 4 || best.count < 0.1 * n) {
    throw Error(ErrorCode::NoConsensus,
                "best consensus " + std::to_string(best.count) + " of " + std::to_string(n));
  }

  // Least-squares refit on the consensus set, repeated while it does not shrink.
  Homography model = *best_model;
  for (int round = 0; round < 5; ++round) {
    std::vector<Point2> iq, it;
    for (std::size_t i = 0; i < n; ++i)
      if (best.mask[i]) {
        iq.push_back(q[i]);
        it.push_back(t[i]);
      }
    const auto refit = fit_homography_dlt(iq, it);
    if (!refit) break;
    auto consensus = detail::score(*refit, q, t, cfg.inlier_threshold);
    if (consensus.count < best.count || consensus.count < 4) break;
    const bool same = consensus.mask == best.mask;
    model = *refit;
    best = std::move(consensus);
    if (same) break;
  }

  RegistrationResult result{model, best.mask, iter, best.error_sum / best.count};
  return result;
}

}  // namespace mosaic
