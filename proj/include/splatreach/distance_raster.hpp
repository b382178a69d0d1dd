#pragma once

#include <array>
#include <filesystem>
#include <limits>

#include "splatreach/distance.hpp"
#include "splatreach/splat_scene.hpp"

namespace splatreach {

/// Pinhole intrinsics; pixel (u, v) is sampled through its centre (u + 0.5, v + 0.5).
struct Intrinsics {
  int width = 16;
  int height = 16;
  double fx = 8.0, fy = 8.0, cx = 8.0, cy = 8.0;

  /// 90 degree horizontal and vertical field of view.
  static Intrinsics fov90(int width, int height);
  static Intrinsics fov90(int resolution) { return fov90(resolution, resolution); }
  /// K^{-1} (u + 0.5, v + 0.5, 1): camera-frame ray with unit z component.
  Vec3 ray(int u, int v) const {
    return {(u + 0.5 - cx) / fx, (v + 0.5 - cy) / fy, 1.0};
  }
};

/// Depth along the camera z-axis; +inf where no splat was recorded.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
};

/// How a ray-splat hit is turned into an alpha value.
enum class OpacityMode {
  kFalloff,  // alpha = opacity * exp(-u^2 / 2), u in splat sigma units
  kRaw,      // alpha = opacity inside the k_sigma footprint, 0 outside
};

struct RasterOptions {
  int resolution = 16;
  double alpha_min = 1.0 / 255.0;
  OpacityMode mode = OpacityMode::kFalloff;
  double near = 1e-4;  // m along z
  /// Hits farther than this range (|p|, m) from the camera centre are ignored.
  double far = std::numeric_limits<double>::infinity();
  /// Rays whose transmittance stays above 0.5 up to `far` are taken to end on an
  /// opaque background beyond it, so no depth is recorded for them.
  bool opaque_background = true;
};

/// The six sensor-relative camera orientations {Rx(0), Rx(+-pi/2), Ry(pi/2), Ry(pi), Ry(3pi/2)}.
const std::array<Mat3, 6>& camera_rotations();

/// Median depth per pixel: front-to-back over splats sorted by mean depth,
/// recording z while the pre-blend transmittance exceeds 0.5.
DepthMap rasterise_median_depth(const SplatScene& scene, const Pose& camera,
                                const Intrinsics& K, double alpha_min,
                                const RasterOptions& options = {});

struct VirtualSensor {
  Pose pose = Pose::Identity();  // world; cameras are pose * camera_rotations()[c]
  double radius = 0.05;
  Intrinsics K = Intrinsics::fov90(16);
};

/// Up to six results (one per camera) for the sensor at a robot sphere.
/// `depth_out`, when given, receives the six depth maps.
std::vector<DistanceResult> sensor_distance(const SplatScene& scene, const VirtualSensor& sensor,
                                            double influence, const RasterOptions& options = {},
                                            std::array<DepthMap, 6>* depth_out = nullptr);

/// Sensors are placed world-axis-aligned at every sphere centre.
std::vector<DistanceResult> query_scene_raster(const SplatScene& scene,
                                               std::span<const SpherePlacement> spheres,
                                               double influence, const RasterOptions& options = {});

/// Portable float map (little-endian, bottom-up rows); +inf written as 0.
void write_pfm(const DepthMap& map, const std::filesystem::path& path);

}  // namespace splatreach
