#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>

namespace splatreach {

/// Ellipsoid surface {p : (p - center)^T conic (p - center) = 1}.
template <typename Scalar>
struct Ellipsoid {
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  using Mat = Eigen::Matrix<Scalar, 3, 3>;

  Vec center = Vec::Zero();
  Mat rotation = Mat::Identity();  // columns are the principal axes
  Vec semi_axes = Vec::Ones();
  Mat conic = Mat::Identity();

  static Ellipsoid from_axes(const Vec& center, const Mat& rotation, const Vec& semi_axes) {
    Ellipsoid e;
    e.center = center;
    e.rotation = rotation;
    e.semi_axes = semi_axes;
    e.conic = rotation * semi_axes.cwiseProduct(semi_axes).cwiseInverse().asDiagonal() *
              rotation.transpose();
    return e;
  }

  /// Quadratic form value; < 1 inside, 1 on the surface.
  Scalar level(const Vec& p) const {
    const Vec d = p - center;
    return d.dot(conic * d);
  }

  bool contains(const Vec& p) const { return level(p) < Scalar(1); }
  Scalar max_semi_axis() const { return semi_axes.maxCoeff(); }
};

using Ellipsoidd = Ellipsoid<double>;

template <typename Scalar>
struct EllipsoidProjection {
  Eigen::Matrix<Scalar, 3, 1> point;  // closest surface point (world)
  bool inside = false;                // query point strictly inside
  int iterations = 0;
};

namespace detail {

template <typename Scalar>
bool lexicographically_less(const Eigen::Matrix<Scalar, 3, 1>& a,
                            const Eigen::Matrix<Scalar, 3, 1>& b) {
  return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

}  // namespace detail

/// Closest point on the ellipsoid surface to p (p may be interior).
///
/// Works in the principal frame, y = R^T (p - c), and bisects the secular
/// function F(t) = sum_i (a_i y_i / (t + a_i^2))^2 - 1 on (-a_min^2, t_hi]
/// with t_hi = |y| a_max + a_max^2. The bisection variable is shifted by
/// a_min^2 so values near the pole keep full relative precision.
/// When the point sits on the medial region of the smallest axis the
/// minimiser is not unique; the candidate with the lexicographically smallest
/// world coordinates is returned.
template <typename Scalar>
EllipsoidProjection<Scalar> closest_point_on_ellipsoid(const Ellipsoid<Scalar>& e,
                                                       const Eigen::Matrix<Scalar, 3, 1>& p,
                                                       int max_iterations = 128,
                                                       Scalar interval_tol = Scalar(1e-12)) {
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  const Vec y = e.rotation.transpose() * (p - e.center);
  const Vec& a = e.semi_axes;
  const Vec a2 = a.cwiseProduct(a);

  EllipsoidProjection<Scalar> out;
  const Scalar lvl = y.cwiseQuotient(a).squaredNorm();
  out.inside = lvl < Scalar(1);
  if (lvl == Scalar(1)) {
    out.point = p;
    return out;
  }

  const Scalar a_min = a.minCoeff();
  const Scalar a_max = a.maxCoeff();
  const Scalar a_min2 = a_min * a_min;
  std::array<bool, 3> is_min{};
  bool min_axes_zero = true;
  for (int i = 0; i < 3; ++i) {
    is_min[i] = a[i] <= a_min * (Scalar(1) + Scalar(1e-12));
    if (is_min[i] && y[i] != Scalar(0)) min_axes_zero = false;
  }

  auto finish = [&](Vec x) {
    // Snap onto the surface; removes residual bisection error in the level.
    const Scalar scale = std::sqrt(x.cwiseQuotient(a).squaredNorm());
    if (scale > Scalar(0)) x /= scale;
    return Vec(e.center + e.rotation * x);
  };

  if (min_axes_zero) {
    Vec x = Vec::Zero();
    Scalar mass = Scalar(0);
    for (int i = 0; i < 3; ++i) {
      if (is_min[i]) continue;
      x[i] = a2[i] * y[i] / (a2[i] - a_min2);
      mass += (x[i] / a[i]) * (x[i] / a[i]);
    }
    if (mass <= Scalar(1)) {
      int k = 0;
      while (!is_min[k]) ++k;
      const Scalar h = a_min * std::sqrt(std::max(Scalar(0), Scalar(1) - mass));
      Vec xp = x, xn = x;
      xp[k] = h;
      xn[k] = -h;
      const Vec qp = finish(xp), qn = finish(xn);
      out.point = detail::lexicographically_less(qn, qp) ? qn : qp;
      return out;
    }
  }

  // s = t + a_min^2, root bracketed in (0, hi].
  auto F = [&](Scalar s) {
    Scalar f = Scalar(-1);
    for (int i = 0; i < 3; ++i) {
      const Scalar r = a[i] * y[i] / (s + a2[i] - a_min2);
      f += r * r;
    }
    return f;
  };
  Scalar lo = Scalar(0);
  Scalar hi = y.norm() * a_max + a_max * a_max + a_min2;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (hi - lo <= interval_tol * hi) break;
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (F(mid) > Scalar(0)) lo = mid;
    else hi = mid;
  }
  const Scalar s = Scalar(0.5) * (lo + hi);
  Vec x;
  for (int i = 0; i < 3; ++i) x[i] = a2[i] * y[i] / (s + a2[i] - a_min2);
  out.point = finish(x);
  out.iterations = it;
  return out;
}

}  // namespace splatreach
