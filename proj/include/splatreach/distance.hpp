#pragma once

#include <span>
#include <string>
#include <vector>

#include "splatreach/core.hpp"
#include "splatreach/kinematics.hpp"
#include "splatreach/primitives.hpp"

namespace splatreach {

enum class Backend { kGeometric, kRaster, kGtSdf };

const char* to_string(Backend b);
/// Accepts "geometric", "raster", "gt-sdf"; throws SpecError otherwise.
Backend backend_from_string(const std::string& s);

/// Clearance of one robot sphere (or one sphere/camera pair) to the scene.
///
/// `grad` is the unit direction in which `d` decreases, i.e. toward the
/// obstacle when the sphere centre is outside it. Approach speed toward the
/// obstacle is grad . p_dot for every backend.
struct DistanceResult {
  double d = 0.0;
  Vec3 grad = Vec3::UnitX();
  int sphere_id = 0;
  Backend backend = Backend::kGeometric;
  int camera_id = -1;  // raster backend only
};

/// Ground-truth backend: one result per sphere with SDF(p) - r <= influence.
std::vector<DistanceResult> query_scene_sdf(const PrimitiveScene& scene,
                                            std::span<const SpherePlacement> spheres,
                                            double influence);

}  // namespace splatreach
