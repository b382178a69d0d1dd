#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "splatreach/core.hpp"

namespace splatreach {

template <typename Scalar>
struct SdfSample {
  Scalar distance;
  Eigen::Matrix<Scalar, 3, 1> gradient;  // unit, direction of increasing distance
};

namespace detail {
template <typename Scalar>
Scalar sign_or_one(Scalar x) {
  return x < Scalar(0) ? Scalar(-1) : Scalar(1);
}
}  // namespace detail

/// Signed distance to an axis-aligned box centred at the origin.
template <typename Scalar>
SdfSample<Scalar> box_sdf(const Eigen::Matrix<Scalar, 3, 1>& p,
                          const Eigen::Matrix<Scalar, 3, 1>& half_extents) {
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  const Vec q = p.cwiseAbs() - half_extents;
  const Vec outside = q.cwiseMax(Scalar(0));
  const Scalar out_norm = outside.norm();
  Vec g = Vec::Zero();
  if (out_norm > Scalar(0)) {
    for (int k = 0; k < 3; ++k) g[k] = detail::sign_or_one(p[k]) * outside[k] / out_norm;
    return {out_norm, g};
  }
  int k = 0;
  const Scalar inner = q.maxCoeff(&k);
  g[k] = detail::sign_or_one(p[k]);
  return {inner, g};
}

/// Signed distance to a z-aligned solid cylinder centred at the origin.
template <typename Scalar>
SdfSample<Scalar> cylinder_sdf(const Eigen::Matrix<Scalar, 3, 1>& p, Scalar radius,
                               Scalar half_height) {
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  const Scalar r = std::hypot(p.x(), p.y());
  const Scalar dr = r - radius;
  const Scalar dz = std::abs(p.z()) - half_height;
  const Scalar ux = r > Scalar(0) ? p.x() / r : Scalar(1);
  const Scalar uy = r > Scalar(0) ? p.y() / r : Scalar(0);
  const Scalar sz = detail::sign_or_one(p.z());
  if (dr > Scalar(0) || dz > Scalar(0)) {
    const Scalar vr = std::max(dr, Scalar(0));
    const Scalar vz = std::max(dz, Scalar(0));
    const Scalar d = std::hypot(vr, vz);
    return {d, Vec(vr * ux / d, vr * uy / d, vz * sz / d)};
  }
  if (dr > dz) return {dr, Vec(ux, uy, Scalar(0))};
  return {dz, Vec(Scalar(0), Scalar(0), sz)};
}

enum class PrimitiveType { kBox, kCylinder };

struct Primitive {
  PrimitiveType type = PrimitiveType::kBox;
  Pose pose = Pose::Identity();
  /// Box: full side lengths. Cylinder: (radius, height, unused).
  Vec3 dims = Vec3::Ones();

  SdfSample<double> sdf(const Vec3& world) const;
  /// World-space bounding box.
  AlignedBox3 bounds() const;
};

struct RobotStart {
  double x = 0.0, y = 0.0, theta = 0.0;
};

/// Ground-truth obstacle geometry and the reaching targets.
struct PrimitiveScene {
  std::vector<Primitive> primitives;
  std::vector<Pose> targets;
  std::optional<RobotStart> start;

  /// Throws SpecError if any dimension is non-positive.
  void validate() const;
};

struct SdfQuery {
  double distance = std::numeric_limits<double>::infinity();
  Vec3 gradient = Vec3::Zero();
  int primitive = -1;
};

/// Exact signed distance to the union of primitives (min over members).
SdfQuery sdf_query(const PrimitiveScene& scene, const Vec3& point);

}  // namespace splatreach
