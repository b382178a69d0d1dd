#include "splatreach/scene_gen.hpp"

#include <algorithm>

namespace splatreach {

namespace {

Primitive box(const Vec3& center, const Vec3& size, double yaw = 0.0) {
  Primitive p;
  p.type = PrimitiveType::kBox;
  p.pose = make_pose(rot_z(yaw), center);
  p.dims = size;
  return p;
}

Primitive cylinder(const Vec3& center, double radius, double height) {
  Primitive p;
  p.type = PrimitiveType::kCylinder;
  p.pose = make_pose(Mat3::Identity(), center);
  p.dims = Vec3(radius, height, 0.0);
  return p;
}

// Frame of the furniture piece: x points away from the robot start.
struct Placement {
  Vec3 origin;
  double yaw;
  Vec3 world(const Vec3& local) const { return origin + rot_z(yaw) * local; }
};

Placement place(Rng& rng) {
  Placement p;
  p.origin = Vec3(rng.uniform(1.45, 1.8), rng.uniform(-0.5, 0.5), 0.0);
  p.yaw = std::atan2(p.origin.y(), p.origin.x()) + rng.uniform(-0.3, 0.3);
  return p;
}

void table_scene(Rng& rng, const Placement& at, PrimitiveScene& scene, Vec3& top_size, double& top_z) {
  const double L = rng.uniform(0.7, 1.0);  // along local x
  const double W = rng.uniform(0.9, 1.4);
  const double H = rng.uniform(0.68, 0.8);
  const double t = 0.04;
  top_size = Vec3(L, W, t);
  top_z = H;
  scene.primitives.push_back(box(at.world(Vec3(0, 0, H - 0.5 * t)), top_size, at.yaw));
  const double leg = 0.05, inset = 0.06;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) {
      const Vec3 c(sx * (0.5 * L - inset), sy * (0.5 * W - inset), 0.5 * (H - t));
      scene.primitives.push_back(box(at.world(c), Vec3(leg, leg, H - t), at.yaw));
    }
  // Clutter anywhere on the top; targets are rejected if the hand would touch it.
  const int n = rng.uniform_int(2, 5);
  for (int k = 0; k < n; ++k) {
    const Vec3 c(rng.uniform(-0.5 * L + 0.08, 0.5 * L - 0.08), rng.uniform(-0.5 * W + 0.08, 0.5 * W - 0.08), H);
    if (rng.uniform() < 0.5) {
      const Vec3 s(rng.uniform(0.06, 0.2), rng.uniform(0.06, 0.2), rng.uniform(0.1, 0.35));
      scene.primitives.push_back(box(at.world(c + Vec3(0, 0, 0.5 * s.z())), s, at.yaw + rng.uniform(-0.5, 0.5)));
    } else {
      const double r = rng.uniform(0.03, 0.07), h = rng.uniform(0.12, 0.35);
      scene.primitives.push_back(cylinder(at.world(c + Vec3(0, 0, 0.5 * h)), r, h));
    }
  }
}

Pose table_target(Rng& rng, const Placement& at, const Vec3& top, double top_z) {
  const double L = top.x(), W = top.y();
  const Vec3 local(rng.uniform(-0.5 * L + 0.15, std::min(-0.5 * L + 0.5, 0.0)),
                   rng.uniform(-0.5 * W + 0.15, 0.5 * W - 0.15), top_z + rng.uniform(0.06, 0.25));
  // Tool z-axis pointing down, random rotation about it.
  const Mat3 R = rot_z(at.yaw + rng.uniform(-kPi / 2, kPi / 2)) * rot_x(kPi);
  return make_pose(R, at.world(local));
}

struct Shelf {
  double W, D, H, t;
  std::vector<double> boards;  // board centre heights
};

Shelf shelf_scene(Rng& rng, const Placement& at, PrimitiveScene& scene) {
  Shelf s;
  s.W = rng.uniform(0.8, 1.2);
  s.D = rng.uniform(0.3, 0.4);
  s.H = rng.uniform(1.5, 1.8);
  s.t = 0.025;
  const double W = s.W, D = s.D, H = s.H, t = s.t;
  // Back panel, two sides, top and bottom boards.
  scene.primitives.push_back(box(at.world(Vec3(0.5 * D - 0.5 * t, 0, 0.5 * H)), Vec3(t, W, H), at.yaw));
  for (int sy : {-1, 1})
    scene.primitives.push_back(
        box(at.world(Vec3(0, sy * (0.5 * W - 0.5 * t), 0.5 * H)), Vec3(D, t, H), at.yaw));
  const int n_boards = rng.uniform_int(4, 6);
  const double gap = (H - 0.05) / n_boards;
  for (int k = 0; k <= n_boards; ++k) {
    const double z = 0.05 + k * gap - (k == n_boards ? 0.5 * t : 0.0);
    s.boards.push_back(z);
    scene.primitives.push_back(box(at.world(Vec3(0, 0, z)), Vec3(D, W - 2 * t, t), at.yaw));
  }
  return s;
}

Pose shelf_target(Rng& rng, const Placement& at, const Shelf& s) {
  // Pick a compartment whose mid height is within arm reach.
  std::vector<int> ok;
  for (std::size_t k = 0; k + 1 < s.boards.size(); ++k) {
    const double mid = 0.5 * (s.boards[k] + s.boards[k + 1]);
    if (mid > 0.3 && mid < 1.3) ok.push_back(static_cast<int>(k));
  }
  const int k = ok.empty() ? 1 : ok[rng.uniform_int(0, static_cast<int>(ok.size()) - 1)];
  const double lo = s.boards[k] + 0.5 * s.t, hi = s.boards[k + 1] - 0.5 * s.t;
  const Vec3 local(-0.5 * s.D + rng.uniform(0.05, 0.2), rng.uniform(-0.5 * s.W + 0.15, 0.5 * s.W - 0.15),
                   lo + rng.uniform(0.08, std::max(0.08, hi - lo - 0.08)));
  // Tool z-axis into the shelf, fingers spread horizontally.
  Mat3 R;
  R.col(2) = Vec3::UnitX();
  R.col(0) = -Vec3::UnitZ();
  R.col(1) = R.col(2).cross(R.col(0));
  return make_pose(rot_z(at.yaw) * R, at.world(local));
}

}  // namespace

const char* to_string(SceneKind k) { return k == SceneKind::kTable ? "table" : "bookshelf"; }

SceneKind scene_kind_from_string(const std::string& s) {
  if (s == "table") return SceneKind::kTable;
  if (s == "bookshelf") return SceneKind::kBookshelf;
  throw SpecError("unknown scene kind '" + s + "'");
}

double hand_clearance(const PrimitiveScene& scene, const RobotModel& model,
                      const SphereSet& spheres, const Pose& ee) {
  const Pose last = ee * model.tool.inverse();
  double c = std::numeric_limits<double>::infinity();
  for (const auto& s : spheres) {
    if (s.link != model.n_links() - 1) continue;
    c = std::min(c, sdf_query(scene, last * s.offset).distance - s.radius);
  }
  return c;
}

GeneratedScene generate_scene(SceneKind kind, int id, std::uint64_t seed, const RobotModel& model,
                              const SphereSet& spheres, const GeneratorOptions& options) {
  if (options.targets < 1) throw SpecError("a scene needs at least one target");
  GeneratedScene g;
  g.kind = kind;
  g.id = id;
  g.seed = seed;
  Rng rng(seed);
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    PrimitiveScene scene;
    scene.start = RobotStart{0.0, 0.0, 0.0};
    const Placement at = place(rng);
    Vec3 top;
    double top_z = 0.0;
    Shelf shelf{};
    if (kind == SceneKind::kTable) {
      table_scene(rng, at, scene, top, top_z);
    } else {
      shelf = shelf_scene(rng, at, scene);
    }
    for (int tries = 0; tries < 50 * options.targets &&
                        static_cast<int>(scene.targets.size()) < options.targets;
         ++tries) {
      const Pose target =
          kind == SceneKind::kTable ? table_target(rng, at, top, top_z) : shelf_target(rng, at, shelf);
      if (hand_clearance(scene, model, spheres, target) >= options.target_clearance)
        scene.targets.push_back(target);
    }
    if (static_cast<int>(scene.targets.size()) == options.targets) {
      g.primitives = std::move(scene);
      return g;
    }
  }
  throw SpecError("could not place targets for scene " + std::to_string(id));
}

std::vector<Splat> sample_surface_splats(const PrimitiveScene& scene, const SurfaceSampling& sampling,
                                         std::uint64_t seed) {
  if (!(sampling.spacing > 0.0)) throw SpecError("sampling spacing must be positive");
  Rng rng(seed);
  const double sigma = sampling.sigma_ratio * sampling.spacing;
  std::vector<Splat> out;

  auto emit = [&](const Vec3& p, const Vec3& t1, const Vec3& n) {
    if (sdf_query(scene, p).distance < -1e-6) return;
    Splat s;
    s.mean = p;
    s.scales = Vec3(sigma, sigma, 0.0);
    Mat3 R;
    R.col(0) = t1.normalized();
    R.col(2) = n.normalized();
    R.col(1) = R.col(2).cross(R.col(0));
    s.rotation = Quat(R);
    s.opacity = sampling.opacity;
    s.kind = SplatKind::k2D;
    out.push_back(s);
  };
  auto cells = [&](double len) { return std::max(1, static_cast<int>(std::lround(len / sampling.spacing))); };
  auto jitter = [&](double step) { return rng.uniform(-sampling.jitter, sampling.jitter) * std::min(step, sampling.spacing); };

  for (const auto& prim : scene.primitives) {
    const Mat3 R = prim.pose.linear();
    const Vec3 c = prim.pose.translation();
    if (prim.type == PrimitiveType::kBox) {
      const Vec3 half = 0.5 * prim.dims;
      for (int axis = 0; axis < 3; ++axis) {
        const int a = (axis + 1) % 3, b = (axis + 2) % 3;
        const int na = cells(prim.dims[a]), nb = cells(prim.dims[b]);
        const double sa = prim.dims[a] / na, sb = prim.dims[b] / nb;
        for (int sign : {-1, 1}) {
          Vec3 n = Vec3::Zero();
          n[axis] = sign;
          Vec3 t1 = Vec3::Zero();
          t1[a] = 1.0;
          for (int i = 0; i < na; ++i)
            for (int j = 0; j < nb; ++j) {
              Vec3 local;
              local[axis] = sign * half[axis];
              local[a] = -half[a] + (i + 0.5) * sa + jitter(sa);
              local[b] = -half[b] + (j + 0.5) * sb + jitter(sb);
              emit(c + R * local, R * t1, R * n);
            }
        }
      }
    } else {
      const double r = prim.dims.x(), h = prim.dims.y();
      const int nt = cells(2.0 * kPi * r), nh = cells(h);
      for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nh; ++j) {
          const double phi = (i + 0.5 + jitter(1.0) / sampling.spacing) * 2.0 * kPi / nt;
          const double z = -0.5 * h + (j + 0.5) * h / nh + jitter(h / nh);
          const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
          emit(c + R * (r * radial + Vec3(0, 0, z)), R * Vec3::UnitZ(), R * radial);
        }
      const int rings = cells(r);
      for (int sign : {-1, 1})
        for (int k = 0; k < rings; ++k) {
          const double rho = (k + 0.5) * r / rings;
          const int n = cells(2.0 * kPi * rho);
          for (int i = 0; i < n; ++i) {
            const double phi = (i + 0.5) * 2.0 * kPi / n;
            const Vec3 local(rho * std::cos(phi), rho * std::sin(phi), sign * 0.5 * h);
            emit(c + R * local, R * Vec3(-std::sin(phi), std::cos(phi), 0.0), R * Vec3(0, 0, sign));
          }
        }
    }
  }
  return out;
}

}  // namespace splatreach
