#include "splatreach/splat_scene.hpp"

#include <algorithm>
#include <limits>

namespace splatreach {

namespace {

constexpr std::size_t kMaxCells = std::size_t{1} << 22;

}  // namespace

Ellipsoidd splat_to_ellipsoid(const Splat& s, double k_sigma, double thickness) {
  if (!(k_sigma > 0.0)) throw SpecError("k_sigma must be positive");
  const double qn = s.rotation.norm();
  if (!(qn > 0.0) || !std::isfinite(qn)) throw DataError("splat has a zero quaternion");
  const Mat3 R = Quat(s.rotation.coeffs() / qn).toRotationMatrix();
  const Vec3 axes = k_sigma * s.scales.cwiseMax(thickness);
  return Ellipsoidd::from_axes(s.mean, R, axes);
}

GridIndex::GridIndex(std::span<const Vec3> points, const AlignedBox3& bounds, double cell_size) {
  if (points.empty()) return;
  origin_ = bounds.min();
  const Vec3 span = bounds.sizes();
  cell_ = std::max(cell_size, 1e-6);
  auto cells_for = [&](double c) {
    Eigen::Vector3i d;
    for (int k = 0; k < 3; ++k) d[k] = std::max(1, static_cast<int>(std::floor(span[k] / c)) + 1);
    return d;
  };
  dims_ = cells_for(cell_);
  while (static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z() > kMaxCells) {
    cell_ *= 1.5;
    dims_ = cells_for(cell_);
  }
  const std::size_t n_cells = static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z();

  std::vector<std::size_t> cell_of(points.size());
  start_.assign(n_cells + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Eigen::Vector3i c;
    for (int k = 0; k < 3; ++k) {
      c[k] = std::clamp(static_cast<int>(std::floor((points[i][k] - origin_[k]) / cell_)), 0,
                        dims_[k] - 1);
    }
    cell_of[i] = (static_cast<std::size_t>(c.z()) * dims_.y() + c.y()) * dims_.x() + c.x();
    ++start_[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < n_cells; ++c) start_[c + 1] += start_[c];
  items_.resize(points.size());
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) items_[fill[cell_of[i]]++] = static_cast<int>(i);
}

SplatScene::SplatScene(std::vector<Splat> splats, SplatGeometry geometry)
    : splats_(std::move(splats)), geometry_(geometry) {
  for (const auto& s : splats_) bounds_.extend(s.mean);
  build();
}

SplatScene::SplatScene(std::vector<Splat> splats, const AlignedBox3& bounds, SplatGeometry geometry)
    : splats_(std::move(splats)), geometry_(geometry), bounds_(bounds) {
  for (const auto& s : splats_) bounds_.extend(s.mean);
  build();
}

void SplatScene::build() {
  const std::size_t n = splats_.size();
  ellipsoids_.reserve(n);
  rotations_.reserve(n);
  whitening_.reserve(n);
  extents_.reserve(n);
  for (auto& s : splats_) {
    // Canonicalise the stored quaternion so downstream users see a unit one.
    const double qn = s.rotation.norm();
    if (!(qn > 0.0)) throw DataError("splat has a zero quaternion");
    s.rotation.coeffs() /= qn;
    ellipsoids_.push_back(splat_to_ellipsoid(s, geometry_.k_sigma, geometry_.thickness));
    rotations_.push_back(ellipsoids_.back().rotation);
    whitening_.push_back(s.scales.cwiseMax(geometry_.thickness).cwiseInverse().asDiagonal() *
                         rotations_.back().transpose());
    extents_.push_back(ellipsoids_.back().max_semi_axis());
    max_extent_ = std::max(max_extent_, extents_.back());
  }
  if (n == 0) return;

  std::vector<double> sorted = extents_;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double cell = 2.0 * sorted[n / 2];

  std::vector<Vec3> pts;
  pts.reserve(n);
  indexed_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (extents_[i] > cell) {
      large_.push_back(static_cast<int>(i));
    } else {
      pts.push_back(splats_[i].mean);
      indexed_.push_back(static_cast<int>(i));
      small_extent_ = std::max(small_extent_, extents_[i]);
    }
  }
  index_ = GridIndex(pts, bounds_, cell);
}

std::vector<int> cull_splats(const SplatScene& scene, const Vec3& center, double radius) {
  std::vector<int> out;
  scene.for_each_candidate(center, radius, [&](int i) {
    if ((scene.splats()[i].mean - center).norm() <= radius + scene.extent(i)) out.push_back(i);
  });
  std::sort(out.begin(), out.end());
  return out;
}

SplatScene inject_floaters(const SplatScene& scene, const FloaterSpec& spec) {
  if (spec.count < 0) throw SpecError("floater count must be non-negative");
  if (!(0.0 <= spec.opacity_lo && spec.opacity_lo <= spec.opacity_hi && spec.opacity_hi <= 1.0))
    throw SpecError("floater opacity range must satisfy 0 <= lo <= hi <= 1");
  std::vector<Splat> splats = scene.splats();
  if (spec.count > 0 && scene.bounds().isEmpty()) throw EmptySceneError("scene has no bounds");
  Rng rng(spec.seed);
  for (int i = 0; i < spec.count; ++i) {
    Splat f;
    f.mean = rng.uniform_in(scene.bounds());
    f.scales = Vec3::Constant(spec.scale);
    f.rotation = Quat::Identity();
    f.opacity = rng.uniform(spec.opacity_lo, spec.opacity_hi);
    f.kind = SplatKind::k3D;
    splats.push_back(f);
  }
  return SplatScene(std::move(splats), scene.bounds(), scene.geometry());
}

}  // namespace splatreach
