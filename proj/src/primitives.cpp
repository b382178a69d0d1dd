#include "splatreach/primitives.hpp"

namespace splatreach {

SdfSample<double> Primitive::sdf(const Vec3& world) const {
  const Vec3 local = pose.inverse() * world;
  SdfSample<double> s =
      type == PrimitiveType::kBox ? box_sdf<double>(local, 0.5 * dims)
                                  : cylinder_sdf<double>(local, dims[0], 0.5 * dims[1]);
  s.gradient = pose.linear() * s.gradient;
  return s;
}

AlignedBox3 Primitive::bounds() const {
  const Vec3 half = type == PrimitiveType::kBox ? Vec3(0.5 * dims)
                                                : Vec3(dims[0], dims[0], 0.5 * dims[1]);
  AlignedBox3 box;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner((c & 1) ? half.x() : -half.x(), (c & 2) ? half.y() : -half.y(),
                      (c & 4) ? half.z() : -half.z());
    box.extend(pose * corner);
  }
  return box;
}

void PrimitiveScene::validate() const {
  for (const auto& p : primitives) {
    const int used = p.type == PrimitiveType::kBox ? 3 : 2;
    for (int k = 0; k < used; ++k)
      if (!(p.dims[k] > 0.0)) throw SpecError("primitive dimensions must be positive");
  }
}

SdfQuery sdf_query(const PrimitiveScene& scene, const Vec3& point) {
  SdfQuery best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const auto s = scene.primitives[i].sdf(point);
    if (s.distance < best.distance) {
      best.distance = s.distance;
      best.gradient = s.gradient;
      best.primitive = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace splatreach
