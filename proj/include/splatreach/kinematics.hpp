#pragma once

#include <string>
#include <vector>

#include "splatreach/core.hpp"

namespace splatreach {

enum class JointType { kRevolute, kPrismatic };

struct ArmJoint {
  std::string name;
  Pose parent = Pose::Identity();  // previous link frame -> this joint's frame at q = 0
  Vec3 axis = Vec3::UnitZ();       // in the joint frame
  JointType type = JointType::kRevolute;
  double lower = -kPi;
  double upper = kPi;
  double velocity = 1.0;  // |q_dot| limit, rad/s or m/s
};

struct BaseLimits {
  double forward_velocity = 0.5;  // m/s, virtual joint delta_x
  double turn_velocity = 1.0;     // rad/s, virtual joint delta_theta
};

/// Which rows of the arm Jacobian enter the manipulability index.
enum class ManipulabilityRows { kFull, kTranslational };

/// Differential-drive base (two virtual joints) carrying a serial arm.
/// Joint order in every q-vector: (delta_x, delta_theta, arm_0, ..., arm_{n-1}).
struct RobotModel {
  Pose base_mount = Pose::Identity();  // base body -> arm mount
  std::vector<ArmJoint> joints;
  Pose tool = Pose::Identity();  // last arm link -> end effector
  BaseLimits base;
  ManipulabilityRows manipulability_rows = ManipulabilityRows::kFull;

  int n_arm() const { return static_cast<int>(joints.size()); }
  int n_dof() const { return 2 + n_arm(); }
  /// Number of links; link 0 is the base body, link i > 0 follows arm joint i-1.
  int n_links() const { return n_arm() + 1; }

  /// Throws SpecError on non-finite or inverted limits.
  void validate() const;
};

/// Collision sphere rigidly attached to a link.
struct CollisionSphere {
  int link = 0;
  Vec3 offset = Vec3::Zero();  // in the link frame
  double radius = 0.05;
};
using SphereSet = std::vector<CollisionSphere>;

void validate_spheres(const RobotModel& model, const SphereSet& spheres);

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  VecX q_arm;

  Pose base_pose() const { return make_pose(rot_z(theta), Vec3(x, y, 0.0)); }
};

/// Wraps theta to (-pi, pi] and clamps the arm to its position limits.
RobotState normalized(const RobotModel& model, RobotState s);

struct ForwardKinematics {
  std::vector<Pose> links;         // n_links world poses, links[0] = base body
  std::vector<Pose> joint_frames;  // world frame of each arm joint before its motion
  Pose ee = Pose::Identity();
};

ForwardKinematics forward_kinematics(const RobotModel& model, const RobotState& state);

/// Geometric Jacobian (rows: linear, angular) of a world point rigidly attached
/// to `link`. Columns cover the 2 + link joints that move that link.
MatX point_jacobian(const RobotModel& model, const RobotState& state,
                    const ForwardKinematics& fk, int link, const Vec3& world_point);

/// jacobian(model, state, link, local point): 6 x (2 + link).
MatX jacobian(const RobotModel& model, const RobotState& state, int link, const Vec3& local_point);

/// Translational rows only, 3 x (2 + link).
MatX translational_jacobian(const RobotModel& model, const RobotState& state, int link,
                            const Vec3& local_point);

/// End-effector Jacobian in the world frame, 6 x n_dof.
MatX ee_jacobian(const RobotModel& model, const RobotState& state, const ForwardKinematics& fk);

struct SpherePlacement {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  int link = 0;
  int id = 0;
};

std::vector<SpherePlacement> sphere_world_positions(const RobotModel& model,
                                                    const ForwardKinematics& fk,
                                                    const SphereSet& spheres);
std::vector<SpherePlacement> sphere_world_positions(const RobotModel& model,
                                                    const RobotState& state,
                                                    const SphereSet& spheres);

/// Product of singular values of J (sqrt det(J J^T) for wide, sqrt det(J^T J) for tall).
double manipulability_index(const MatX& J);

struct Manipulability {
  double index = 0.0;
  VecX gradient;  // n_dof, base columns zero
};

/// Arm-only manipulability and its gradient by central differences of step h.
/// Returns zeros when the index falls below `singular_tol`.
Manipulability manipulability_jacobian(const RobotModel& model, const RobotState& state,
                                       double h = 1e-6, double singular_tol = 1e-9);

}  // namespace splatreach
