#pragma once

#include <limits>
#include <span>
#include <vector>

#include "splatreach/distance.hpp"
#include "splatreach/distance_raster.hpp"
#include "splatreach/kinematics.hpp"
#include "splatreach/qp.hpp"
#include "splatreach/splat_scene.hpp"

namespace splatreach {

struct ControllerConfig {
  double k_e = 1.5;             // 1/s
  double linear_cap = 0.25;     // m/s per twist component
  double angular_cap = 0.5;     // rad/s per twist component
  double lambda_base = 0.01;    // joint-velocity weight, virtual base joints
  double lambda_arm = 0.01;     // joint-velocity weight, arm joints
  double lambda_slack = 1000.0;  // slack weight
  double slack_limit = std::numeric_limits<double>::infinity();
  double k_m = 0.01;  // manipulability gain
  double k_o = 0.5;   // base orientation gain
  double d_i = 0.3;   // influence distance (m)
  double d_s = 0.02;  // stopping distance (m)
  double eta = 1.0;   // damper gain (1/s)
  double beta_max = 2.0;
  bool inequalities = true;
  bool active_cost = true;
  double tol_t = 0.02;   // m
  double tol_R = 0.035;  // rad
  double joint_limit_influence = 0.3;  // rad, start of the position-limit ramp
  double joint_limit_buffer = 0.02;    // rad, velocity toward the limit is zero here
  double opacity_min = 0.0;            // geometric backend splat filter
  RasterOptions raster;
  double qp_tol = 1e-8;
  int qp_max_iter = 200;

  /// Throws SpecError when d_i <= d_s, d_s < 0 or a gain is negative.
  void validate() const;
};

/// Obstacle representation handed to the controller. Splat backends read
/// `splats`, the ground-truth backend reads `primitives`.
struct ObstacleScene {
  const SplatScene* splats = nullptr;
  const PrimitiveScene* primitives = nullptr;
};

struct ControlDiagnostics {
  int inequalities = 0;        // damper rows passed to the QP
  int active_constraints = 0;  // rows and bounds active at the solution
  double min_distance = std::numeric_limits<double>::infinity();
  QPStatus status = QPStatus::kOptimal;
  int qp_iterations = 0;
  double qp_time_ms = 0.0;    // wall clock; not deterministic
  double step_time_ms = 0.0;  // whole control step, wall clock
};

struct ControlOutput {
  VecX q_dot;
  Vec6 slack = Vec6::Zero();
  ControlDiagnostics diag;
};

/// k_e * (translation error, rotation-vector error) in the world frame,
/// each component clamped to +-cap.
Vec6 servo_twist(const Pose& current, const Pose& target, double k_e, double linear_cap,
                 double angular_cap);

struct DamperConstraints {
  MatX A;  // rows x (n_dof + 6)
  VecX b;
};

/// One row per result: grad^T J_v(sphere centre), rhs eta (d - d_s) / (d_i - d_s).
/// `jacobians[k]` is the 3 x (2 + link) translational Jacobian for results[k].
DamperConstraints build_damper_constraints(std::span<const DistanceResult> results,
                                           std::span<const MatX> jacobians, double d_i,
                                           double d_s, double eta, int n_dof);

/// beta * weighted average of the rows, w_j = (d_i - d_j) / (d_i - d_s) with d_j
/// recovered from the rhs, beta = beta_max * clamp(max w, 0, 1).
VecX build_active_collision_cost(const DamperConstraints& c, double d_i, double d_s,
                                 double eta, double beta_max);

/// Cost vector (n_dof + 6) with -k_o * alpha on the base rotation joint, alpha
/// the signed bearing of the target from the base x-axis in the ground plane.
VecX base_orientation_cost(const RobotState& state, const Pose& target, double k_o, int n_dof);

/// Velocity box for q_dot: limits tightened linearly near arm position limits.
std::pair<VecX, VecX> velocity_bounds(const RobotModel& model, const RobotState& state,
                                      const ControllerConfig& config);

/// Distance results for the chosen backend.
std::vector<DistanceResult> query_distances(const ObstacleScene& scene, Backend backend,
                                            std::span<const SpherePlacement> spheres,
                                            const ControllerConfig& config);

/// Damper rows for `results` with the sphere Jacobians at `state`.
DamperConstraints damper_constraints_for(const RobotModel& model, const RobotState& state,
                                         const ForwardKinematics& fk,
                                         std::span<const SpherePlacement> spheres,
                                         std::span<const DistanceResult> results,
                                         const ControllerConfig& config);

/// One control step. An infeasible or unfinished QP yields zero velocity.
ControlOutput control_step(const RobotModel& model, const SphereSet& spheres,
                           const RobotState& state, const Pose& target,
                           const ObstacleScene& scene, Backend backend,
                           const ControllerConfig& config);

}  // namespace splatreach
