#include "splatreach/distance_raster.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace splatreach {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfPi = 0.5 * kPi;
// Stop compositing once T has dropped to 0.5 (within rounding).
constexpr double kMedianCut = 0.5 * (1.0 - 1e-6);

struct Entry {
  double key;  // mean depth along camera z
  int splat;
  int u0, u1, v0, v1;
};

// Range of lateral/z ratios covered by a ball (lateral a, depth z, radius rho)
// restricted to z > 0. Returns false when the ball lies entirely behind.
bool ratio_range(double a, double z, double rho, double& lo, double& hi) {
  const double r2 = a * a + z * z;
  if (r2 <= rho * rho) {
    lo = -kInf;
    hi = kInf;
    return true;
  }
  if (z > 0.0) {
    // tan(phi +- beta) with sin(beta) = rho / r, without trig. Each denominator
    // is r^2 cos(phi +- beta), so a non-positive one means the edge passes 90 degrees.
    const double s = std::sqrt(r2 - rho * rho);
    const double c_hi = z * s - a * rho;
    const double c_lo = z * s + a * rho;
    hi = c_hi > 0.0 ? (a * s + z * rho) / c_hi : kInf;
    lo = c_lo > 0.0 ? (a * s - z * rho) / c_lo : -kInf;
    return true;
  }
  const double phi = std::atan2(a, z);
  const double beta = std::asin(rho / std::sqrt(r2));
  if (phi - beta >= kHalfPi || phi + beta <= -kHalfPi) return false;
  lo = phi - beta <= -kHalfPi ? -kInf : std::tan(phi - beta);
  hi = phi + beta >= kHalfPi ? kInf : std::tan(phi + beta);
  return true;
}

bool pixel_span(double lo, double hi, double f, double c, int n, int& p0, int& p1) {
  const double a = lo * f + c - 0.5;
  const double b = hi * f + c - 0.5;
  p0 = a <= 0.0 ? 0 : static_cast<int>(std::min<double>(n, std::ceil(a)));
  p1 = b >= n - 1 ? n - 1 : static_cast<int>(std::max<double>(-1.0, std::floor(b)));
  return p0 <= p1;
}

// Footprint radius in sigma units beyond which a hit cannot reach alpha_min.
double footprint_sigma(double opacity, double alpha_min, double k_sigma, OpacityMode mode) {
  if (mode == OpacityMode::kRaw) return k_sigma;
  if (alpha_min <= 0.0) return 8.0;
  return std::sqrt(2.0 * std::log(opacity / alpha_min));
}

struct Candidate {
  int splat;
  double rho;  // radius of the ball holding every hit with alpha >= alpha_min
};

void gather(const SplatScene& scene, int i, double alpha_min, const RasterOptions& opt,
            std::vector<Candidate>& out) {
  const Splat& s = scene.splats()[i];
  if (s.opacity <= 0.0 || s.opacity < alpha_min) return;
  const double k_sigma = scene.geometry().k_sigma;
  const double thickness = scene.geometry().thickness;
  out.push_back({i, footprint_sigma(s.opacity, alpha_min, k_sigma, opt.mode) *
                        s.scales.cwiseMax(thickness).maxCoeff()});
}

DepthMap render(const SplatScene& scene, std::span<const Candidate> candidates, const Pose& camera,
                const Intrinsics& K, double alpha_min, const RasterOptions& opt) {
  DepthMap map;
  map.width = K.width;
  map.height = K.height;
  map.depth.assign(static_cast<std::size_t>(K.width) * K.height, kInf);

  const Mat3 R = camera.linear();
  const Vec3 origin = camera.translation();
  const double k_sigma = scene.geometry().k_sigma;

  thread_local std::vector<Entry> entries;
  entries.clear();
  for (const auto& [i, rho] : candidates) {
    const Vec3 rel = scene.splats()[i].mean - origin;
    if (rel.norm() - rho > opt.far) continue;
    const Vec3 mc = R.transpose() * rel;
    if (mc.z() + rho <= opt.near) continue;
    double xlo, xhi, ylo, yhi;
    if (!ratio_range(mc.x(), mc.z(), rho, xlo, xhi) || !ratio_range(mc.y(), mc.z(), rho, ylo, yhi))
      continue;
    Entry e{mc.z(), i, 0, 0, 0, 0};
    if (!pixel_span(xlo, xhi, K.fx, K.cx, K.width, e.u0, e.u1)) continue;
    if (!pixel_span(ylo, yhi, K.fy, K.cy, K.height, e.v0, e.v1)) continue;
    entries.push_back(e);
  }
  if (entries.empty()) return map;
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.key < b.key || (a.key == b.key && a.splat < b.splat);
  });

  // Per-pixel lists in CSR form, preserving the global depth order.
  const int n_pix = K.width * K.height;
  thread_local std::vector<int> start, items;
  start.assign(n_pix + 1, 0);
  for (const auto& e : entries)
    for (int v = e.v0; v <= e.v1; ++v)
      for (int u = e.u0; u <= e.u1; ++u) ++start[v * K.width + u + 1];
  for (int p = 0; p < n_pix; ++p) start[p + 1] += start[p];
  items.resize(start[n_pix]);
  {
    thread_local std::vector<int> fill;
    fill.assign(start.begin(), start.end() - 1);
    for (int k = 0; k < static_cast<int>(entries.size()); ++k) {
      const auto& e = entries[k];
      for (int v = e.v0; v <= e.v1; ++v)
        for (int u = e.u0; u <= e.u1; ++u) items[fill[v * K.width + u]++] = e.splat;
    }
  }

  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      const int pix = v * K.width + u;
      if (start[pix] == start[pix + 1]) continue;
      const Vec3 ray_c = K.ray(u, v);
      const double range_per_z = ray_c.norm();
      const Vec3 ray = R * ray_c;
      double T = 1.0;
      double depth = kInf;
      for (int k = start[pix]; k < start[pix + 1]; ++k) {
        const int i = items[k];
        const Splat& s = scene.splats()[i];
        const Mat3& M = scene.whitening(i);
        const Vec3 to_mean = s.mean - origin;
        double t, u2;
        if (s.kind == SplatKind::k2D) {
          const Vec3 n = scene.rotation(i).col(2);
          const double denom = n.dot(ray);
          if (std::abs(denom) < 1e-12) continue;
          t = n.dot(to_mean) / denom;
          const Vec3 e = M * (t * ray - to_mean);
          u2 = e.x() * e.x() + e.y() * e.y();
        } else {
          const Vec3 w = M * ray;
          const Vec3 m0 = M * to_mean;
          t = w.dot(m0) / w.squaredNorm();
          u2 = (t * w - m0).squaredNorm();
        }
        if (t <= opt.near || t * range_per_z > opt.far) continue;
        double alpha;
        if (opt.mode == OpacityMode::kFalloff) {
          alpha = s.opacity * std::exp(-0.5 * u2);
        } else {
          alpha = u2 <= k_sigma * k_sigma ? s.opacity : 0.0;
        }
        if (alpha <= 0.0 || alpha < alpha_min) continue;
        if (T > 0.5) depth = t;
        T *= 1.0 - alpha;
        if (T <= kMedianCut) break;
      }
      if (opt.opaque_background && T > kMedianCut) depth = kInf;
      map.depth[pix] = depth;
    }
  }
  return map;
}

}  // namespace

Intrinsics Intrinsics::fov90(int width, int height) {
  Intrinsics K;
  K.width = width;
  K.height = height;
  K.fx = 0.5 * width;
  K.fy = 0.5 * height;
  K.cx = 0.5 * width;
  K.cy = 0.5 * height;
  return K;
}

const std::array<Mat3, 6>& camera_rotations() {
  static const std::array<Mat3, 6> kRotations = {rot_x(0.0),        rot_x(0.5 * kPi), rot_x(-0.5 * kPi),
                                                 rot_y(0.5 * kPi), rot_y(kPi),       rot_y(1.5 * kPi)};
  return kRotations;
}

DepthMap rasterise_median_depth(const SplatScene& scene, const Pose& camera, const Intrinsics& K,
                                double alpha_min, const RasterOptions& options) {
  if (!(alpha_min >= 0.0 && alpha_min < 1.0)) throw SpecError("alpha_min must lie in [0, 1)");
  std::vector<Candidate> candidates;
  if (std::isfinite(options.far)) {
    const double k = scene.geometry().k_sigma;
    const double widen = std::max(1.0, footprint_sigma(1.0, alpha_min, k, options.mode) / k);
    scene.for_each_candidate(camera.translation(), options.far + (widen - 1.0) * scene.max_extent(),
                             [&](int i) { gather(scene, i, alpha_min, options, candidates); });
  } else {
    for (std::size_t i = 0; i < scene.size(); ++i)
      gather(scene, static_cast<int>(i), alpha_min, options, candidates);
  }
  return render(scene, candidates, camera, K, alpha_min, options);
}

std::vector<DistanceResult> sensor_distance(const SplatScene& scene, const VirtualSensor& sensor,
                                            double influence, const RasterOptions& options,
                                            std::array<DepthMap, 6>* depth_out) {
  if (!(influence > 0.0)) throw SpecError("influence distance must be positive");
  RasterOptions opt = options;
  opt.far = influence + sensor.radius;

  const Vec3 origin = sensor.pose.translation();
  thread_local std::vector<Candidate> candidates;
  candidates.clear();
  // The alpha footprint can exceed the k_sigma extent in falloff mode.
  const double k = scene.geometry().k_sigma;
  const double widen = std::max(1.0, footprint_sigma(1.0, opt.alpha_min, k, opt.mode) / k);
  scene.for_each_candidate(origin, opt.far + (widen - 1.0) * scene.max_extent(), [&](int i) {
    if ((scene.splats()[i].mean - origin).norm() <= opt.far + widen * scene.extent(i))
      gather(scene, i, opt.alpha_min, opt, candidates);
  });

  std::vector<DistanceResult> out;
  const auto& rotations = camera_rotations();
  for (int c = 0; c < 6; ++c) {
    const Pose cam = make_pose(sensor.pose.linear() * rotations[c], origin);
    DepthMap map;
    if (!candidates.empty() || depth_out) map = render(scene, candidates, cam, sensor.K, opt.alpha_min, opt);
    if (depth_out) (*depth_out)[c] = map;
    if (candidates.empty()) continue;

    double best = kInf;
    int bu = -1, bv = -1;
    for (int v = 0; v < map.height; ++v)
      for (int u = 0; u < map.width; ++u) {
        const double z = map.at(u, v);
        if (!std::isfinite(z)) continue;
        const double range = z * sensor.K.ray(u, v).norm();
        if (range < best) {
          best = range;
          bu = u;
          bv = v;
        }
      }
    if (bu < 0) continue;
    const double d = best - sensor.radius;
    if (d > influence) continue;
    DistanceResult r;
    r.d = d;
    r.grad = (cam.linear() * sensor.K.ray(bu, bv)).normalized();
    r.backend = Backend::kRaster;
    r.camera_id = c;
    out.push_back(r);
  }
  return out;
}

std::vector<DistanceResult> query_scene_raster(const SplatScene& scene,
                                               std::span<const SpherePlacement> spheres,
                                               double influence, const RasterOptions& options) {
  std::vector<DistanceResult> out;
  VirtualSensor sensor;
  sensor.K = Intrinsics::fov90(options.resolution);
  for (const auto& s : spheres) {
    sensor.pose = make_pose(Mat3::Identity(), s.center);
    sensor.radius = s.radius;
    for (auto r : sensor_distance(scene, sensor, influence, options)) {
      r.sphere_id = s.id;
      out.push_back(r);
    }
  }
  return out;
}

void write_pfm(const DepthMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
  for (int v = map.height - 1; v >= 0; --v)
    for (int u = 0; u < map.width; ++u) {
      const double z = map.at(u, v);
      const float f = std::isfinite(z) ? static_cast<float>(z) : 0.0f;
      out.write(reinterpret_cast<const char*>(&f), sizeof(float));
    }
}

}  // namespace splatreach
