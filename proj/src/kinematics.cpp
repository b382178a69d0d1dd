#include "splatreach/kinematics.hpp"

#include <algorithm>

namespace splatreach {

namespace {

Pose joint_motion(const ArmJoint& j, double q) {
  Pose m = Pose::Identity();
  if (j.type == JointType::kRevolute) m.linear() = Eigen::AngleAxisd(q, j.axis).toRotationMatrix();
  else m.translation() = q * j.axis;
  return m;
}

MatX arm_ee_jacobian(const RobotModel& model, const VecX& q_arm) {
  RobotState s;
  s.q_arm = q_arm;
  const auto fk = forward_kinematics(model, s);
  const MatX J = ee_jacobian(model, s, fk).rightCols(model.n_arm());
  if (model.manipulability_rows == ManipulabilityRows::kTranslational) return J.topRows(3);
  return J;
}

}  // namespace

void RobotModel::validate() const {
  for (const auto& j : joints) {
    if (!std::isfinite(j.lower) || !std::isfinite(j.upper) || !std::isfinite(j.velocity))
      throw SpecError("joint '" + j.name + "' has non-finite limits");
    if (!(j.lower < j.upper)) throw SpecError("joint '" + j.name + "' has lower >= upper");
    if (!(j.velocity > 0.0)) throw SpecError("joint '" + j.name + "' has non-positive velocity limit");
    if (j.axis.norm() < 1e-9) throw SpecError("joint '" + j.name + "' has a zero axis");
  }
  if (!(base.forward_velocity > 0.0) || !(base.turn_velocity > 0.0))
    throw SpecError("base velocity limits must be positive");
}

void validate_spheres(const RobotModel& model, const SphereSet& spheres) {
  for (const auto& s : spheres) {
    if (!(s.radius > 0.0)) throw SpecError("sphere radius must be positive");
    if (s.link < 0 || s.link >= model.n_links()) throw SpecError("sphere link index out of range");
  }
}

RobotState normalized(const RobotModel& model, RobotState s) {
  s.theta = wrap_angle(s.theta);
  for (int i = 0; i < model.n_arm(); ++i)
    s.q_arm[i] = std::clamp(s.q_arm[i], model.joints[i].lower, model.joints[i].upper);
  return s;
}

ForwardKinematics forward_kinematics(const RobotModel& model, const RobotState& state) {
  ForwardKinematics fk;
  fk.links.reserve(model.n_links());
  fk.joint_frames.reserve(model.n_arm());
  Pose T = state.base_pose();
  fk.links.push_back(T);
  T = T * model.base_mount;
  for (int i = 0; i < model.n_arm(); ++i) {
    const auto& j = model.joints[i];
    const Pose frame = T * j.parent;
    fk.joint_frames.push_back(frame);
    T = frame * joint_motion(j, state.q_arm[i]);
    fk.links.push_back(T);
  }
  fk.ee = T * model.tool;
  return fk;
}

MatX point_jacobian(const RobotModel& model, const RobotState& state, const ForwardKinematics& fk,
                    int link, const Vec3& p) {
  MatX J = MatX::Zero(6, 2 + link);
  // delta_x: forward translation along the base heading.
  J(0, 0) = std::cos(state.theta);
  J(1, 0) = std::sin(state.theta);
  // delta_theta: rotation about the vertical through the base origin.
  J(0, 1) = -(p.y() - state.y);
  J(1, 1) = p.x() - state.x;
  J(5, 1) = 1.0;
  for (int i = 0; i < link; ++i) {
    const auto& j = model.joints[i];
    const Vec3 axis = fk.joint_frames[i].linear() * j.axis.normalized();
    if (j.type == JointType::kRevolute) {
      J.block<3, 1>(0, 2 + i) = axis.cross(p - fk.joint_frames[i].translation());
      J.block<3, 1>(3, 2 + i) = axis;
    } else {
      J.block<3, 1>(0, 2 + i) = axis;
    }
  }
  return J;
}

MatX jacobian(const RobotModel& model, const RobotState& state, int link, const Vec3& local_point) {
  const auto fk = forward_kinematics(model, state);
  return point_jacobian(model, state, fk, link, fk.links[link] * local_point);
}

MatX translational_jacobian(const RobotModel& model, const RobotState& state, int link,
                            const Vec3& local_point) {
  return jacobian(model, state, link, local_point).topRows(3);
}

MatX ee_jacobian(const RobotModel& model, const RobotState& state, const ForwardKinematics& fk) {
  return point_jacobian(model, state, fk, model.n_arm(), fk.ee.translation());
}

std::vector<SpherePlacement> sphere_world_positions(const RobotModel& model,
                                                    const ForwardKinematics& fk,
                                                    const SphereSet& spheres) {
  (void)model;
  std::vector<SpherePlacement> out;
  out.reserve(spheres.size());
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    const auto& s = spheres[i];
    out.push_back({fk.links[s.link] * s.offset, s.radius, s.link, static_cast<int>(i)});
  }
  return out;
}

std::vector<SpherePlacement> sphere_world_positions(const RobotModel& model, const RobotState& state,
                                                    const SphereSet& spheres) {
  return sphere_world_positions(model, forward_kinematics(model, state), spheres);
}

double manipulability_index(const MatX& J) {
  const MatX G = J.rows() <= J.cols() ? MatX(J * J.transpose()) : MatX(J.transpose() * J);
  return std::sqrt(std::max(0.0, G.determinant()));
}

Manipulability manipulability_jacobian(const RobotModel& model, const RobotState& state, double h,
                                       double singular_tol) {
  Manipulability out;
  out.gradient = VecX::Zero(model.n_dof());
  out.index = manipulability_index(arm_ee_jacobian(model, state.q_arm));
  if (out.index < singular_tol) {
    out.index = 0.0;
    return out;
  }
  VecX q = state.q_arm;
  for (int i = 0; i < model.n_arm(); ++i) {
    const double q0 = q[i];
    q[i] = q0 + h;
    const double up = manipulability_index(arm_ee_jacobian(model, q));
    q[i] = q0 - h;
    const double down = manipulability_index(arm_ee_jacobian(model, q));
    q[i] = q0;
    out.gradient[2 + i] = (up - down) / (2.0 * h);
  }
  return out;
}

}  // namespace splatreach
