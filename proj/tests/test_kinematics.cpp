#include "support.hpp"

using namespace splatreach;
using namespace splatreach::test;

namespace {

using Mat4 = Eigen::Matrix4d;

Mat4 hom(const Pose& p) { return p.matrix(); }

Mat4 rot_about(const Vec3& axis, double q) {
  // Rodrigues, written out so the oracle shares no code with the library.
  const Vec3 k = axis.normalized();
  Mat3 K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = Mat3::Identity() + std::sin(q) * K + (1 - std::cos(q)) * K * K;
  return T;
}

// Homogeneous-matrix chain: links and end effector.
std::vector<Mat4> chain(const RobotModel& m, const RobotState& s, Mat4* ee) {
  Mat4 T = Mat4::Identity();
  T(0, 0) = std::cos(s.theta);
  T(0, 1) = -std::sin(s.theta);
  T(1, 0) = std::sin(s.theta);
  T(1, 1) = std::cos(s.theta);
  T(0, 3) = s.x;
  T(1, 3) = s.y;
  std::vector<Mat4> links{T};
  T = T * hom(m.base_mount);
  for (int i = 0; i < m.n_arm(); ++i) {
    T = T * hom(m.joints[i].parent) * rot_about(m.joints[i].axis, s.q_arm[i]);
    links.push_back(T);
  }
  *ee = T * hom(m.tool);
  return links;
}

// World position of a local point on `link` after nudging joint `col`.
Vec3 nudged_point(const RobotModel& m, RobotState s, int col, double h, int link, const Vec3& local) {
  if (col == 0) {
    s.x += h * std::cos(s.theta);
    s.y += h * std::sin(s.theta);
  } else if (col == 1) {
    s.theta += h;
  } else {
    s.q_arm[col - 2] += h;
  }
  return forward_kinematics(m, s).links[link] * local;
}

Mat3 nudged_rotation(const RobotModel& m, RobotState s, int col, double h) {
  if (col == 0) {
    s.x += h * std::cos(s.theta);
    s.y += h * std::sin(s.theta);
  } else if (col == 1) {
    s.theta += h;
  } else {
    s.q_arm[col - 2] += h;
  }
  return forward_kinematics(m, s).ee.linear();
}

}  // namespace

TEST_CASE("forward kinematics: fixed transforms and base composition") {
  const RobotConfig& r = default_robot();
  const RobotState zero = state_of(r.model, 0, 0, 0, VecX::Zero(r.model.n_arm()));
  Pose expect = r.model.base_mount;
  for (const auto& j : r.model.joints) expect = expect * j.parent;
  expect = expect * r.model.tool;
  CHECK((forward_kinematics(r.model, zero).ee.matrix() - expect.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  const RobotState moved = state_of(r.model, 1, 2, kPi / 2, VecX::Zero(r.model.n_arm()));
  const Pose base = make_pose(rot_z(kPi / 2), Vec3(1, 2, 0));
  CHECK((forward_kinematics(r.model, moved).ee.matrix() - (base * expect).matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward kinematics matches an independent homogeneous chain") {
  const RobotConfig& r = default_robot();
  Rng rng(1);
  for (int n = 0; n < 100; ++n) {
    const RobotState s = random_state(r.model, rng);
    const auto fk = forward_kinematics(r.model, s);
    Mat4 ee;
    const auto links = chain(r.model, s, &ee);
    CHECK((fk.ee.matrix() - ee).cwiseAbs().maxCoeff() < 1e-10);
    for (std::size_t i = 0; i < links.size(); ++i) {
      CHECK((fk.links[i].matrix() - links[i]).cwiseAbs().maxCoeff() < 1e-10);
      const Mat3 R = fk.links[i].linear();
      CHECK((R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(std::abs(R.determinant() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("base translation column") {
  const RobotConfig& r = default_robot();
  for (double th : {0.0, 0.7, -2.0}) {
    const RobotState s = state_of(r.model, 0.3, -0.2, th, VecX::Zero(r.model.n_arm()));
    const MatX J = translational_jacobian(r.model, s, 4, Vec3(0.1, 0.0, 0.05));
    CHECK((J.col(0) - Vec3(std::cos(th), std::sin(th), 0)).norm() < 1e-15);
  }
}

TEST_CASE("planar 2R Jacobian and manipulability") {
  RobotModel m = planar_2r();
  m.manipulability_rows = ManipulabilityRows::kTranslational;
  VecX q(2);
  q << 0, kPi / 2;
  const RobotState s = state_of(m, 0, 0, 0, q);
  const auto fk = forward_kinematics(m, s);
  const MatX J = ee_jacobian(m, s, fk);
  Eigen::Matrix2d expect;
  expect << -1, -1, 1, 0;
  CHECK((J.block<2, 2>(0, 2) - expect).cwiseAbs().maxCoeff() < 1e-12);

  const Manipulability man = manipulability_jacobian(m, s);
  CHECK(man.index == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(man.gradient[0] == 0.0);
  CHECK(man.gradient[1] == 0.0);
  // m = |sin q2|: derivative zero at q2 = pi/2.
  CHECK(std::abs(man.gradient[3]) < 1e-6);

  q << 0.3, 0.0;
  const Manipulability sing = manipulability_jacobian(m, state_of(m, 0, 0, 0, q));
  CHECK(sing.index == 0.0);
  CHECK(sing.gradient.allFinite());

  // l1 l2 |sin q2| over a sweep, derivative cos q2.
  for (double q2 : {0.4, 1.0, 2.2}) {
    q << -0.5, q2;
    const Manipulability a = manipulability_jacobian(m, state_of(m, 0, 0, 0, q));
    CHECK(a.index == doctest::Approx(std::sin(q2)).epsilon(1e-12));
    CHECK(a.gradient[3] == doctest::Approx(std::cos(q2)).epsilon(1e-6));
  }
}

TEST_CASE("Jacobians match finite differences of forward kinematics") {
  const RobotConfig& r = default_robot();
  Rng rng(2);
  const double h = 1e-6;
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const RobotState s = random_state(r.model, rng);
    const int link = rng.uniform_int(0, r.model.n_arm());
    const Vec3 local(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    const MatX J = translational_jacobian(r.model, s, link, local);
    REQUIRE(J.cols() == 2 + link);
    for (int c = 0; c < J.cols(); ++c) {
      const Vec3 fd = (nudged_point(r.model, s, c, h, link, local) -
                       nudged_point(r.model, s, c, -h, link, local)) / (2 * h);
      worst = std::max(worst, (fd - J.col(c)).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst < 1e-6);

  // Angular rows of the end-effector Jacobian.
  worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const RobotState s = random_state(r.model, rng);
    const MatX J = ee_jacobian(r.model, s, forward_kinematics(r.model, s));
    for (int c = 0; c < J.cols(); ++c) {
      const Mat3 Rp = nudged_rotation(r.model, s, c, h);
      const Mat3 Rm = nudged_rotation(r.model, s, c, -h);
      const Vec3 w = rotation_log(Rp * Rm.transpose()) / (2 * h);
      worst = std::max(worst, (w - J.block<3, 1>(3, c)).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("manipulability gradient matches an independent finite difference") {
  const RobotConfig& r = default_robot();
  Rng rng(4);
  int checked = 0;
  for (int n = 0; n < 100; ++n) {
    const RobotState s = random_state(r.model, rng);
    const Manipulability m = manipulability_jacobian(r.model, s);
    if (m.index < 1e-3) continue;
    ++checked;
    const double h = 1e-5;
    for (int i = 0; i < r.model.n_arm(); ++i) {
      RobotState a = s, b = s;
      a.q_arm[i] += h;
      b.q_arm[i] -= h;
      const double fd = (manipulability_jacobian(r.model, a).index - manipulability_jacobian(r.model, b).index) / (2 * h);
      CHECK(std::abs(fd - m.gradient[2 + i]) <= 1e-3 * std::max(1e-2, std::abs(fd)));
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("sphere placement") {
  const RobotConfig& r = default_robot();
  CHECK(r.spheres.size() == 77);
  Rng rng(6);
  for (int n = 0; n < 100; ++n) {
    const RobotState s = random_state(r.model, rng);
    const auto fk = forward_kinematics(r.model, s);
    const auto placed = sphere_world_positions(r.model, s, r.spheres);
    for (std::size_t i = 0; i < r.spheres.size(); ++i) {
      const auto& sp = r.spheres[i];
      const Eigen::Vector4d h = fk.links[sp.link].matrix() * sp.offset.homogeneous();
      CHECK((placed[i].center - h.head<3>()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(placed[i].radius == sp.radius);
    }
  }

  // Sphere at a link origin equals the link position.
  SphereSet one{{3, Vec3::Zero(), 0.05}};
  const RobotState s = random_state(r.model, rng);
  CHECK((sphere_world_positions(r.model, s, one)[0].center - forward_kinematics(r.model, s).links[3].translation()).norm() < 1e-15);

  // Base spheres rotate about the base origin and keep their mutual distances.
  SphereSet base{{0, Vec3(0.3, 0.1, 0.2), 0.1}, {0, Vec3(-0.2, -0.25, 0.1), 0.1}};
  RobotState a = state_of(r.model, 0, 0, 0, VecX());
  RobotState b = state_of(r.model, 0, 0, 1.1, VecX());
  const auto pa = sphere_world_positions(r.model, a, base);
  const auto pb = sphere_world_positions(r.model, b, base);
  CHECK((pb[0].center - rot_z(1.1) * pa[0].center).norm() < 1e-15);
  for (int n = 0; n < 100; ++n) {
    const RobotState t = random_state(r.model, rng);
    const auto pt = sphere_world_positions(r.model, t, base);
    CHECK(std::abs((pt[0].center - pt[1].center).norm() - (pa[0].center - pa[1].center).norm()) < 1e-12);
  }
}

TEST_CASE("normalized wraps theta and clamps the arm") {
  const RobotConfig& r = default_robot();
  RobotState s = state_of(r.model, 0, 0, 3 * kPi, VecX::Constant(r.model.n_arm(), 10.0));
  s = normalized(r.model, s);
  CHECK(s.theta == doctest::Approx(kPi));
  for (int i = 0; i < r.model.n_arm(); ++i) CHECK(s.q_arm[i] == r.model.joints[i].upper);
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
}
