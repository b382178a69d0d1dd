#pragma once

#include <string>
#include <vector>

#include "splatreach/kinematics.hpp"
#include "splatreach/primitives.hpp"
#include "splatreach/splat_scene.hpp"

namespace splatreach {

enum class SceneKind { kTable, kBookshelf };

const char* to_string(SceneKind k);
SceneKind scene_kind_from_string(const std::string& s);

struct SurfaceSampling {
  double spacing = 0.02;     // m between neighbouring splats
  double sigma_ratio = 0.6;  // in-plane standard deviation / spacing
  double jitter = 0.25;      // uniform offset, fraction of spacing
  double opacity = 1.0;
};

struct GeneratorOptions {
  int targets = 1;  // targets per scene
  SurfaceSampling sampling;
  /// Minimum ground-truth clearance of the hand spheres at each target.
  double target_clearance = 0.04;
  int max_attempts = 200;
};

struct GeneratedScene {
  SceneKind kind = SceneKind::kTable;
  int id = 0;
  std::uint64_t seed = 0;
  PrimitiveScene primitives;
};

/// Seeded scene with obstacles in front of a robot that starts at the origin
/// facing +x; every target lies beyond the arm's reach from the start.
GeneratedScene generate_scene(SceneKind kind, int id, std::uint64_t seed, const RobotModel& model,
                              const SphereSet& spheres, const GeneratorOptions& options = {});

/// Flat 2D splats on a jittered grid over every primitive face. Samples buried
/// inside another primitive are dropped.
std::vector<Splat> sample_surface_splats(const PrimitiveScene& scene, const SurfaceSampling& sampling,
                                         std::uint64_t seed);

/// Clearance of the spheres rigidly attached to the last arm link when the end
/// effector sits at `ee`.
double hand_clearance(const PrimitiveScene& scene, const RobotModel& model,
                      const SphereSet& spheres, const Pose& ee);

}  // namespace splatreach
