#include "splatreach/controller.hpp"

#include <algorithm>
#include <chrono>

#include "splatreach/distance_geometric.hpp"

namespace splatreach {

namespace {

// Damper rows whose joint-space norm falls below this carry no usable direction.
constexpr double kRowEps = 1e-9;

}  // namespace

void ControllerConfig::validate() const {
  if (!(d_s >= 0.0)) throw SpecError("d_s must be non-negative");
  if (!(d_i > d_s)) throw SpecError("d_i must exceed d_s");
  for (double g : {k_e, linear_cap, angular_cap, k_m, k_o, eta, beta_max})
    if (!(g >= 0.0)) throw SpecError("controller gains must be non-negative");
  if (!(lambda_base > 0.0 && lambda_arm > 0.0 && lambda_slack > 0.0))
    throw SpecError("QP weights must be positive");
  if (!(tol_t > 0.0 && tol_R > 0.0)) throw SpecError("success tolerances must be positive");
  if (!(joint_limit_influence > joint_limit_buffer && joint_limit_buffer >= 0.0))
    throw SpecError("joint limit influence must exceed its buffer");
  if (raster.resolution < 1) throw SpecError("raster resolution must be positive");
}

Vec6 servo_twist(const Pose& current, const Pose& target, double k_e, double linear_cap,
                 double angular_cap) {
  Vec6 v;
  v.head<3>() = k_e * (target.translation() - current.translation());
  v.tail<3>() = k_e * rotation_log(target.linear() * current.linear().transpose());
  for (int i = 0; i < 3; ++i) {
    v[i] = std::clamp(v[i], -linear_cap, linear_cap);
    v[i + 3] = std::clamp(v[i + 3], -angular_cap, angular_cap);
  }
  return v;
}

DamperConstraints build_damper_constraints(std::span<const DistanceResult> results,
                                           std::span<const MatX> jacobians, double d_i,
                                           double d_s, double eta, int n_dof) {
  if (!(d_i > d_s)) throw SpecError("d_i must exceed d_s");
  if (results.size() != jacobians.size()) throw SpecError("one Jacobian per distance result");
  DamperConstraints c;
  c.A = MatX::Zero(static_cast<Eigen::Index>(results.size()), n_dof + 6);
  c.b.resize(static_cast<Eigen::Index>(results.size()));
  for (std::size_t k = 0; k < results.size(); ++k) {
    const MatX& Jv = jacobians[k];
    if (Jv.rows() != 3 || Jv.cols() > n_dof) throw SpecError("sphere Jacobian has wrong shape");
    const auto row = static_cast<Eigen::Index>(k);
    c.A.row(row).head(Jv.cols()) = results[k].grad.transpose() * Jv;
    c.b[row] = eta * (results[k].d - d_s) / (d_i - d_s);
  }
  return c;
}

VecX build_active_collision_cost(const DamperConstraints& c, double d_i, double d_s, double eta,
                                 double beta_max) {
  VecX cost = VecX::Zero(c.A.cols());
  if (c.A.rows() == 0 || eta <= 0.0) return cost;
  double w_sum = 0.0, w_max = 0.0;
  for (Eigen::Index j = 0; j < c.A.rows(); ++j) {
    const double d = d_s + c.b[j] * (d_i - d_s) / eta;
    const double w = std::max(0.0, (d_i - d) / (d_i - d_s));
    if (w <= 0.0) continue;
    cost += w * c.A.row(j).transpose();
    w_sum += w;
    w_max = std::max(w_max, w);
  }
  if (w_sum <= 0.0) return VecX::Zero(c.A.cols());
  const double beta = beta_max * std::min(w_max, 1.0);
  return (beta / w_sum) * cost;
}

VecX base_orientation_cost(const RobotState& state, const Pose& target, double k_o, int n_dof) {
  VecX c = VecX::Zero(n_dof + 6);
  const Vec3 t = target.translation();
  const double dx = t.x() - state.x, dy = t.y() - state.y;
  if (dx == 0.0 && dy == 0.0) return c;
  const double alpha = wrap_angle(std::atan2(dy, dx) - state.theta);
  c[1] = -k_o * alpha;
  return c;
}

std::pair<VecX, VecX> velocity_bounds(const RobotModel& model, const RobotState& state,
                                      const ControllerConfig& config) {
  const int n = model.n_dof();
  VecX lb(n), ub(n);
  lb[0] = -model.base.forward_velocity;
  ub[0] = model.base.forward_velocity;
  lb[1] = -model.base.turn_velocity;
  ub[1] = model.base.turn_velocity;
  const double rho = config.joint_limit_influence;
  const double buf = config.joint_limit_buffer;
  for (int i = 0; i < model.n_arm(); ++i) {
    const auto& j = model.joints[i];
    const double q = state.q_arm[i];
    const double v = j.velocity;
    double hi = v, lo = -v;
    const double up_gap = j.upper - q;
    const double down_gap = q - j.lower;
    if (up_gap < rho) hi = std::max(-v, v * (up_gap - buf) / (rho - buf));
    if (down_gap < rho) lo = std::min(v, -v * (down_gap - buf) / (rho - buf));
    if (lo > hi) lo = hi = 0.5 * (lo + hi);
    lb[2 + i] = lo;
    ub[2 + i] = hi;
  }
  return {lb, ub};
}

std::vector<DistanceResult> query_distances(const ObstacleScene& scene, Backend backend,
                                            std::span<const SpherePlacement> spheres,
                                            const ControllerConfig& config) {
  switch (backend) {
    case Backend::kGtSdf:
      if (!scene.primitives) throw SpecError("gt-sdf backend needs a primitive scene");
      return query_scene_sdf(*scene.primitives, spheres, config.d_i);
    case Backend::kGeometric:
      if (!scene.splats) throw SpecError("geometric backend needs a splat scene");
      return query_scene_geometric(*scene.splats, spheres, config.d_i, config.opacity_min);
    case Backend::kRaster:
      if (!scene.splats) throw SpecError("raster backend needs a splat scene");
      return query_scene_raster(*scene.splats, spheres, config.d_i, config.raster);
  }
  return {};
}

DamperConstraints damper_constraints_for(const RobotModel& model, const RobotState& state,
                                         const ForwardKinematics& fk,
                                         std::span<const SpherePlacement> spheres,
                                         std::span<const DistanceResult> results,
                                         const ControllerConfig& config) {
  std::vector<MatX> jac;
  jac.reserve(results.size());
  for (const auto& r : results) {
    const auto& s = spheres[r.sphere_id];
    jac.push_back(point_jacobian(model, state, fk, s.link, s.center).topRows(3));
  }
  return build_damper_constraints(results, jac, config.d_i, config.d_s, config.eta,
                                  model.n_dof());
}

ControlOutput control_step(const RobotModel& model, const SphereSet& spheres,
                           const RobotState& state, const Pose& target,
                           const ObstacleScene& scene, Backend backend,
                           const ControllerConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int n = model.n_dof();
  const int nx = n + 6;
  const auto fk = forward_kinematics(model, state);
  const MatX Je = ee_jacobian(model, state, fk);

  QPProblem p;
  p.Q = MatX::Zero(nx, nx);
  p.Q.diagonal().head(2).setConstant(config.lambda_base);
  p.Q.diagonal().segment(2, model.n_arm()).setConstant(config.lambda_arm);
  p.Q.diagonal().tail(6).setConstant(config.lambda_slack);

  p.c = VecX::Zero(nx);
  if (config.k_m > 0.0) p.c.head(n) -= config.k_m * manipulability_jacobian(model, state).gradient;
  if (config.k_o > 0.0) p.c += base_orientation_cost(state, target, config.k_o, n);

  p.A_eq.resize(6, nx);
  p.A_eq << Je, MatX::Identity(6, 6);
  p.b_eq = servo_twist(fk.ee, target, config.k_e, config.linear_cap, config.angular_cap);

  ControlOutput out;
  const bool need_distances = config.inequalities || config.active_cost;
  DamperConstraints dampers;
  dampers.A.resize(0, nx);
  dampers.b.resize(0);
  if (need_distances) {
    const auto placed = sphere_world_positions(model, fk, spheres);
    const auto results = query_distances(scene, backend, placed, config);
    for (const auto& r : results) out.diag.min_distance = std::min(out.diag.min_distance, r.d);
    dampers = damper_constraints_for(model, state, fk, placed, results, config);
  }
  if (config.active_cost)
    p.c += build_active_collision_cost(dampers, config.d_i, config.d_s, config.eta,
                                       config.beta_max);
  if (config.inequalities) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < dampers.A.rows(); ++j)
      if (dampers.A.row(j).norm() > kRowEps) keep.push_back(j);
    p.A_in.resize(static_cast<Eigen::Index>(keep.size()), nx);
    p.b_in.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      p.A_in.row(static_cast<Eigen::Index>(k)) = dampers.A.row(keep[k]);
      p.b_in[static_cast<Eigen::Index>(k)] = dampers.b[keep[k]];
    }
  } else {
    p.A_in.resize(0, nx);
    p.b_in.resize(0);
  }
  out.diag.inequalities = static_cast<int>(p.A_in.rows());

  auto [lb, ub] = velocity_bounds(model, state, config);
  p.lb.resize(nx);
  p.ub.resize(nx);
  p.lb << lb, VecX::Constant(6, -config.slack_limit);
  p.ub << ub, VecX::Constant(6, config.slack_limit);

  const auto t0 = std::chrono::steady_clock::now();
  const QPSolution sol = solve_qp(p, config.qp_tol, config.qp_max_iter);
  const auto t1 = std::chrono::steady_clock::now();
  out.diag.qp_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  out.diag.status = sol.status;
  out.diag.qp_iterations = sol.iterations;
  out.diag.active_constraints = sol.active_constraints;

  if (sol.status == QPStatus::kOptimal) {
    out.q_dot = sol.x.head(n);
    out.slack = sol.x.tail<6>();
  } else {
    out.q_dot = VecX::Zero(n);
  }
  out.diag.step_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace splatreach
