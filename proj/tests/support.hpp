#pragma once

#include <doctest.h>

#include "splatreach/bench.hpp"
#include "splatreach/io.hpp"

#ifndef SPLATREACH_CONFIG_DIR
#define SPLATREACH_CONFIG_DIR "config"
#endif

namespace splatreach::test {

inline const RobotConfig& default_robot() {
  static const RobotConfig r =
      robot_from_json(read_json(std::string(SPLATREACH_CONFIG_DIR) + "/robot_default.json"));
  return r;
}

inline ControllerConfig default_controller() {
  return controller_from_json(read_json(std::string(SPLATREACH_CONFIG_DIR) + "/controller_default.json"));
}

/// Planar 2R arm with unit links on a base with identity mounts.
inline RobotModel planar_2r() {
  RobotModel m;
  ArmJoint j1;
  j1.name = "j1";
  ArmJoint j2;
  j2.name = "j2";
  j2.parent = make_pose(Mat3::Identity(), Vec3(1, 0, 0));
  m.joints = {j1, j2};
  m.tool = make_pose(Mat3::Identity(), Vec3(1, 0, 0));
  return m;
}

inline RobotState state_of(const RobotModel& m, double x, double y, double theta, VecX q) {
  RobotState s;
  s.x = x;
  s.y = y;
  s.theta = theta;
  s.q_arm = q.size() ? q : VecX(VecX::Zero(m.n_arm()));
  return s;
}

inline RobotState random_state(const RobotModel& m, Rng& rng) {
  RobotState s;
  s.x = rng.uniform(-2, 2);
  s.y = rng.uniform(-2, 2);
  s.theta = rng.uniform(-kPi, kPi);
  s.q_arm.resize(m.n_arm());
  for (int i = 0; i < m.n_arm(); ++i) s.q_arm[i] = rng.uniform(m.joints[i].lower, m.joints[i].upper);
  return s;
}

/// Flat splat in the plane with normal `n`, in-plane sigma `sigma`.
inline Splat disc(const Vec3& mean, const Vec3& n, double sigma, double opacity) {
  Splat s;
  s.mean = mean;
  s.scales = Vec3(sigma, sigma, 0.0);
  Mat3 R;
  R.col(2) = n.normalized();
  R.col(0) = R.col(2).unitOrthogonal();
  R.col(1) = R.col(2).cross(R.col(0));
  s.rotation = Quat(R);
  s.opacity = opacity;
  s.kind = SplatKind::k2D;
  return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("splatreach_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace splatreach::test
