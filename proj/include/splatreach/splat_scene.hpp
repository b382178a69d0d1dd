#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "splatreach/core.hpp"
#include "splatreach/ellipsoid.hpp"

namespace splatreach {

enum class SplatKind { k3D, k2D };

struct Splat {
  Vec3 mean = Vec3::Zero();
  Vec3 scales = Vec3::Zero();  // per-axis standard deviations; scales[2] may be 0 for 2D splats
  Quat rotation = Quat::Identity();
  double opacity = 1.0;
  SplatKind kind = SplatKind::k3D;
};

/// Confidence level and thickness floor used to turn a Gaussian into a solid.
struct SplatGeometry {
  double k_sigma = 2.0;
  double thickness = 1e-3;  // minimum semi-axis (m) for degenerate covariances
};

/// Ellipsoid at k_sigma standard deviations, semi-axes floored at `thickness`.
/// Throws DataError on a zero quaternion.
Ellipsoidd splat_to_ellipsoid(const Splat& s, double k_sigma, double thickness = 1e-3);

/// Uniform grid over points, stored CSR-style (cell offsets + flat item list).
class GridIndex {
 public:
  GridIndex() = default;
  GridIndex(std::span<const Vec3> points, const AlignedBox3& bounds, double cell_size);

  /// Calls f(i) for every point whose cell intersects the query ball's
  /// bounding box. Superset of the points within `radius`.
  template <typename F>
  void for_each_candidate(const Vec3& center, double radius, F&& f) const {
    if (items_.empty()) return;
    Eigen::Vector3i lo, hi;
    for (int k = 0; k < 3; ++k) {
      const double a = (center[k] - radius - origin_[k]) / cell_;
      const double b = (center[k] + radius - origin_[k]) / cell_;
      if (b < 0.0 || a >= dims_[k]) return;
      lo[k] = std::max(0, static_cast<int>(std::floor(a)));
      hi[k] = std::min(dims_[k] - 1, static_cast<int>(std::floor(b)));
    }
    for (int z = lo.z(); z <= hi.z(); ++z)
      for (int y = lo.y(); y <= hi.y(); ++y) {
        const std::size_t row = (static_cast<std::size_t>(z) * dims_.y() + y) * dims_.x();
        const int b = start_[row + lo.x()];
        const int e = start_[row + hi.x() + 1];
        for (int j = b; j < e; ++j) f(items_[j]);
      }
  }

  double cell_size() const { return cell_; }
  const Eigen::Vector3i& dims() const { return dims_; }

 private:
  Vec3 origin_ = Vec3::Zero();
  double cell_ = 1.0;
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  std::vector<int> start_;
  std::vector<int> items_;
};

/// Immutable set of splats with bounds, cached ellipsoids and a culling index.
class SplatScene {
 public:
  SplatScene() = default;
  explicit SplatScene(std::vector<Splat> splats, SplatGeometry geometry = {});
  /// `bounds` is grown to contain every mean if needed.
  SplatScene(std::vector<Splat> splats, const AlignedBox3& bounds, SplatGeometry geometry = {});

  const std::vector<Splat>& splats() const { return splats_; }
  std::size_t size() const { return splats_.size(); }
  bool empty() const { return splats_.empty(); }
  const AlignedBox3& bounds() const { return bounds_; }
  const SplatGeometry& geometry() const { return geometry_; }

  const Ellipsoidd& ellipsoid(int i) const { return ellipsoids_[i]; }
  /// k_sigma * max(scales), the culling extent of splat i.
  double extent(int i) const { return extents_[i]; }
  double max_extent() const { return max_extent_; }
  const Mat3& rotation(int i) const { return rotations_[i]; }
  /// diag(1 / max(scales, thickness)) * R^T: maps world offsets to sigma units.
  const Mat3& whitening(int i) const { return whitening_[i]; }

  /// Calls f(i) for a superset of splats with |mean - center| <= radius + extent(i).
  template <typename F>
  void for_each_candidate(const Vec3& center, double radius, F&& f) const {
    index_.for_each_candidate(center, radius + small_extent_, [&](int j) { f(indexed_[j]); });
    for (int i : large_) f(i);
  }

  const GridIndex& index() const { return index_; }

 private:
  void build();

  std::vector<Splat> splats_;
  SplatGeometry geometry_;
  AlignedBox3 bounds_;
  std::vector<Ellipsoidd> ellipsoids_;
  std::vector<Mat3> rotations_;
  std::vector<Mat3> whitening_;
  std::vector<double> extents_;
  GridIndex index_;
  std::vector<int> indexed_;   // grid item -> splat id
  double small_extent_ = 0.0;  // largest extent among indexed splats
  double max_extent_ = 0.0;
  std::vector<int> large_;     // splats wider than a grid cell, always visited
};

/// Indices of splats with |mean - center| <= radius + extent, ascending.
std::vector<int> cull_splats(const SplatScene& scene, const Vec3& center, double radius);

enum class Activation { kRaw, kStandard };

/// Reads a PLY splat file (binary little-endian or ascii).
/// Standard activation: opacity = sigmoid(stored), scale = exp(stored).
/// A missing scale_2 marks 2D splats; an optional uchar `kind` (1 = 2D) overrides.
SplatScene load_scene(const std::filesystem::path& path, Activation activation,
                      SplatGeometry geometry = {});

/// Writes binary little-endian PLY with float fields, inverse of load_scene.
void write_scene(const SplatScene& scene, const std::filesystem::path& path,
                 Activation activation = Activation::kStandard);

struct FloaterSpec {
  int count = 1000;
  std::uint64_t seed = 0;
  double opacity_lo = 0.05;
  double opacity_hi = 0.5;
  double scale = 0.02;  // isotropic standard deviation (m)
};

/// Adds `count` isotropic low-opacity splats uniformly inside the scene bounds.
SplatScene inject_floaters(const SplatScene& scene, const FloaterSpec& spec);

}  // namespace splatreach
