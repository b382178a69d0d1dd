#include "splatreach/distance_geometric.hpp"

#include <algorithm>
#include <stdexcept>

namespace splatreach {

const char* to_string(Backend b) {
  switch (b) {
    case Backend::kGeometric: return "geometric";
    case Backend::kRaster: return "raster";
    case Backend::kGtSdf: return "gt-sdf";
  }
  return "unknown";
}

Backend backend_from_string(const std::string& s) {
  if (s == "geometric") return Backend::kGeometric;
  if (s == "raster") return Backend::kRaster;
  if (s == "gt-sdf") return Backend::kGtSdf;
  throw SpecError("unknown backend '" + s + "'");
}

std::vector<DistanceResult> query_scene_sdf(const PrimitiveScene& scene,
                                            std::span<const SpherePlacement> spheres,
                                            double influence) {
  std::vector<DistanceResult> out;
  for (const auto& s : spheres) {
    const SdfQuery q = sdf_query(scene, s.center);
    const double d = q.distance - s.radius;
    if (q.primitive < 0 || d > influence) continue;
    out.push_back({d, -q.gradient, s.id, Backend::kGtSdf, -1});
  }
  return out;
}

DistanceResult sphere_ellipsoid_distance(const Ellipsoidd& e, const Vec3& center, double radius) {
  const auto proj = closest_point_on_ellipsoid(e, center);
  const Vec3 delta = proj.point - center;
  const double gap = delta.norm();
  DistanceResult r;
  r.backend = Backend::kGeometric;
  if (gap > 0.0) {
    r.d = proj.inside ? -gap - radius : gap - radius;
    // Outside: toward the surface. Inside: away from the exit point.
    r.grad = proj.inside ? Vec3(-delta / gap) : Vec3(delta / gap);
  } else {
    r.d = -radius;
    r.grad = -(e.conic * (center - e.center)).normalized();
  }
  return r;
}

std::optional<DistanceResult> sphere_distance_geometric(const SplatScene& scene,
                                                        const SpherePlacement& sphere,
                                                        double influence, double opacity_min) {
  const double reach = influence + sphere.radius;
  // (lower bound on the signed centre-to-surface distance, splat id). A centre
  // within `extent` of the mean may be inside, penetrating at most `extent`.
  thread_local std::vector<std::pair<double, int>> cand;
  cand.clear();
  scene.for_each_candidate(sphere.center, reach, [&](int i) {
    if (scene.splats()[i].opacity < opacity_min) return;
    const double gap = (scene.splats()[i].mean - sphere.center).norm() - scene.extent(i);
    if (gap <= reach) cand.emplace_back(gap >= 0.0 ? gap : -scene.extent(i), i);
  });
  if (cand.empty()) return std::nullopt;
  std::sort(cand.begin(), cand.end());

  std::optional<DistanceResult> best;
  for (const auto& [lb, i] : cand) {
    if (best && lb - sphere.radius > best->d) break;
    DistanceResult r = sphere_ellipsoid_distance(scene.ellipsoid(i), sphere.center, sphere.radius);
    if (!best || r.d < best->d) best = r;
  }
  if (!best || best->d > influence) return std::nullopt;
  best->sphere_id = sphere.id;
  return best;
}

std::vector<DistanceResult> query_scene_geometric(const SplatScene& scene,
                                                  std::span<const SpherePlacement> spheres,
                                                  double influence, double opacity_min) {
  if (!(influence > 0.0)) throw SpecError("influence distance must be positive");
  std::vector<DistanceResult> out;
  for (const auto& s : spheres) {
    if (auto r = sphere_distance_geometric(scene, s, influence, opacity_min)) out.push_back(*r);
  }
  std::sort(out.begin(), out.end(),
            [](const DistanceResult& a, const DistanceResult& b) { return a.sphere_id < b.sphere_id; });
  return out;
}

}  // namespace splatreach
