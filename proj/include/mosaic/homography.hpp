#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "mosaic/error.hpp"

namespace mosaic {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// 3x3 projective transform, kept normalized so that h(2,2) == 1 whenever
/// that entry is non-zero. Construction rejects singular matrices.
class Homography {
 public:
  static constexpr double kSingularTolerance = 1e-12;

  Homography() : h_(Eigen::Matrix3d::Identity()) {}

  explicit Homography(const Eigen::Matrix3d& m) : h_(normalized(m)) {
    if (!std::isfinite(h_.sum()) || std::abs(h_.determinant()) <= kSingularTolerance) {
      throw Error(ErrorCode::SingularHomography, "matrix is not invertible");
    }
  }

  /// Row-major construction, convenient for literals and the CLI.
  static Homography from_row_major(const std::array<double, 9>& v) {
    Eigen::Matrix3d m;
    m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    return Homography(m);
  }

  static Homography identity() { return Homography(); }

  static Homography translation(double tx, double ty) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 2) = tx;
    m(1, 2) = ty;
    return Homography(m);
  }

  const Eigen::Matrix3d& matrix() const noexcept { return h_; }
  double operator()(int r, int c) const { return h_(r, c); }

  std::array<double, 9> row_major() const {
    return {h_(0, 0), h_(0, 1), h_(0, 2), h_(1, 0), h_(1, 1), h_(1, 2), h_(2, 0), h_(2, 1), h_(2, 2)};
  }

  Homography inverse() const { return Homography(h_.inverse()); }

  /// this * rhs: apply rhs first.
  Homography operator*(const Homography& rhs) const { return Homography(h_ * rhs.h_); }

  Point2 apply(const Point2& p) const {
    const double w = h_(2, 0) * p.x + h_(2, 1) * p.y + h_(2, 2);
    return {(h_(0, 0) * p.x + h_(0, 1) * p.y + h_(0, 2)) / w,
            (h_(1, 0) * p.x + h_(1, 1) * p.y + h_(1, 2)) / w};
  }

 private:
  static Eigen::Matrix3d normalized(const Eigen::Matrix3d& m) {
    const double s = m(2, 2);
    if (std::abs(s) > 1e-15 && std::isfinite(s)) return m / s;
    return m;
  }

  Eigen::Matrix3d h_;
};

/// Frobenius distance between two homographies after scale normalization.
inline double frobenius_distance(const Homography& a, const Homography& b) {
  return (a.matrix() - b.matrix()).norm();
}

/// Mean displacement of the four image corners under `a` versus `b`.
inline double mean_corner_error(const Homography& a, const Homography& b, int width, int height) {
  const std::array<Point2, 4> corners{Point2{0, 0}, Point2{double(width - 1), 0},
                                      Point2{0, double(height - 1)},
                                      Point2{double(width - 1), double(height - 1)}};
  double sum = 0.0;
  for (const auto& c : corners) sum += distance(a.apply(c), b.apply(c));
  return sum / 4.0;
}

}  // namespace mosaic
