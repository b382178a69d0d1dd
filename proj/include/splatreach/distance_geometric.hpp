#pragma once

#include <optional>

#include "splatreach/distance.hpp"
#include "splatreach/splat_scene.hpp"

namespace splatreach {

/// Sphere-to-ellipsoid clearance of a single sphere against the culled splats
/// with opacity >= opacity_min. Empty when the minimum exceeds `influence`.
std::optional<DistanceResult> sphere_distance_geometric(const SplatScene& scene,
                                                        const SpherePlacement& sphere,
                                                        double influence, double opacity_min = 0.0);

/// At most one result per sphere, sorted by sphere id.
std::vector<DistanceResult> query_scene_geometric(const SplatScene& scene,
                                                  std::span<const SpherePlacement> spheres,
                                                  double influence, double opacity_min = 0.0);

/// Signed sphere clearance to one ellipsoid and the unit direction of decrease.
DistanceResult sphere_ellipsoid_distance(const Ellipsoidd& e, const Vec3& center, double radius);

}  // namespace splatreach
