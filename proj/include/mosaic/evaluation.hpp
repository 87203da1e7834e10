#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "mosaic/registration.hpp"

namespace mosaic {

struct GroundTruth {
  Homography h_gt;  // left-frame points -> right-frame points
  double tolerance_px = 3.0;
};

struct MetricRow {
  std::size_t left_keypoints = 0;
  std::size_t right_keypoints = 0;
  std::size_t matches = 0;  // NNDR matches
  std::size_t inliers = 0;  // RANSAC inliers among them
  std::size_t correct_matches = 0;
  std::size_t gt_correspondences = 0;
  double repeatability = 0.0;
  double recall = 0.0;
  double one_minus_precision = 0.0;
};

inline double round_to(double v, int decimals) {
  const double s = std::pow(10.0, decimals);
  return std::round(v * s) / s;
}

/// matched / (left + right), unrounded.
inline double repeatability_exact(std::size_t left_count, std::size_t right_count, std::size_t matched) {
  if (left_count + right_count == 0) throw Error(ErrorCode::ZeroKeypoints, "no keypoints on either side");
  return static_cast<double>(matched) / static_cast<double>(left_count + right_count);
}

/// Reported repeatability, rounded half away from zero to 3 decimals.
inline double repeatability(std::size_t left_count, std::size_t right_count, std::size_t matched) {
  return round_to(repeatability_exact(left_count, right_count, matched), 3);
}

struct MatchedPair {
  Point2 left;
  Point2 right;
};

struct RecallPrecision {
  double recall = 0.0;
  double one_minus_precision = 0.0;
  std::size_t correct = 0;
  std::size_t wrong = 0;
};

/// A match is correct when h_gt carries its left point within tolerance of
/// its right point. Both rates are 0 on an empty match list.
inline RecallPrecision recall_precision(std::span<const MatchedPair> matches, const GroundTruth& gt,
                                        std::size_t total_gt_correspondences) {
  if (total_gt_correspondences < 1) {
    throw Error(ErrorCode::InvalidArgument, "total_gt_correspondences must be >= 1");
  }
  RecallPrecision r;
  for (const auto& m : matches) {
    if (distance(gt.h_gt.apply(m.left), m.right) <= gt.tolerance_px) ++r.correct;
    else ++r.wrong;
  }
  r.recall = static_cast<double>(r.correct) / total_gt_correspondences;
  const std::size_t total = r.correct + r.wrong;
  r.one_minus_precision = total ? static_cast<double>(r.wrong) / total : 0.0;
  return r;
}

/// Left keypoints whose ground-truth image lands inside the right frame and
/// has a detected right keypoint within tolerance.
inline std::size_t count_gt_correspondences(std::span<const Keypoint> left, std::span<const Keypoint> right,
                                            const GroundTruth& gt, int right_width, int right_height) {
  std::size_t n = 0;
  for (const auto& kl : left) {
    const Point2 p = gt.h_gt.apply({kl.x, kl.y});
    if (!(p.x >= 0 && p.y >= 0 && p.x <= right_width - 1 && p.y <= right_height - 1)) continue;
    for (const auto& kr : right) {
      if (distance(p, {kr.x, kr.y}) <= gt.tolerance_px) {
        ++n;
        break;
      }
    }
  }
  return n;
}

struct EvaluationConfig {
  ScaleSpaceConfig detect;
  CslbpParams descriptor;
  double nndr_ratio = 0.8;
  RansacConfig ransac;
};

/// Detect, describe and match one left/right pair and score it against the
/// ground-truth homography.
inline MetricRow evaluate_pair(const GrayImage& left, const GrayImage& right, const GroundTruth& gt,
                               const EvaluationConfig& cfg = {}) {
  const auto kl = detect_keypoints(left, cfg.detect);
  const auto kr = detect_keypoints(right, cfg.detect);
  const auto dl = describe_all(left, kl, cfg.descriptor);
  const auto dr = describe_all(right, kr, cfg.descriptor);
  const auto matches = match_nndr(dl, dr, cfg.nndr_ratio);

  MetricRow row;
  row.left_keypoints = kl.size();
  row.right_keypoints = kr.size();
  row.matches = matches.size();
  row.repeatability = (kl.empty() && kr.empty()) ? 0.0 : repeatability(kl.size(), kr.size(), matches.size());

  std::vector<Keypoint> kl_described, kr_described;
  for (const auto& d : dl) kl_described.push_back(d.keypoint);
  for (const auto& d : dr) kr_described.push_back(d.keypoint);
  row.gt_correspondences = count_gt_correspondences(kl_described, kr_described, gt, right.width(), right.height());

  std::vector<MatchedPair> pairs;
  for (const auto& m : matches) {
    pairs.push_back({{dl[m.query_idx].keypoint.x, dl[m.query_idx].keypoint.y},
                     {dr[m.train_idx].keypoint.x, dr[m.train_idx].keypoint.y}});
  }
  if (row.gt_correspondences > 0) {
    const auto rp = recall_precision(pairs, gt, row.gt_correspondences);
    row.recall = rp.recall;
    row.one_minus_precision = rp.one_minus_precision;
    row.correct_matches = rp.correct;
  }

  if (matches.size() >= 4) {
    std::vector<Point2> pl, pr;
    for (const auto& d : dl) pl.push_back({d.keypoint.x, d.keypoint.y});
    for (const auto& d : dr) pr.push_back({d.keypoint.x, d.keypoint.y});
    try {
      row.inliers = estimate_homography(matches, pl, pr, cfg.ransac).inlier_count();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConsensus) throw;
    }
  }
  return row;
}

inline std::string metric_csv_header() {
  return "left_keypoints,right_keypoints,matches,inliers,repeatability,recall,one_minus_precision";
}

inline std::string metric_csv_row(const MetricRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.3f,%.3f,%.3f", r.left_keypoints, r.right_keypoints,
                r.matches, r.inliers, r.repeatability, r.recall, r.one_minus_precision);
  return buf;
}

}  // namespace mosaic
