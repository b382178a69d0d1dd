#include "splatreach/sim.hpp"

#include <algorithm>

namespace splatreach {

RobotState integrate(const RobotModel& model, const RobotState& state, const VecX& q_dot,
                     double dt) {
  if (!(dt > 0.0)) throw SpecError("dt must be positive");
  if (q_dot.size() != model.n_dof()) throw SpecError("q_dot has the wrong size");
  RobotState s = state;
  s.x += q_dot[0] * dt * std::cos(state.theta);
  s.y += q_dot[0] * dt * std::sin(state.theta);
  s.theta = wrap_angle(state.theta + q_dot[1] * dt);
  for (int i = 0; i < model.n_arm(); ++i) {
    const auto& j = model.joints[i];
    s.q_arm[i] = std::clamp(state.q_arm[i] + q_dot[2 + i] * dt, j.lower, j.upper);
  }
  return s;
}

CollisionCheck check_collision(const PrimitiveScene& scene, const RobotModel& model,
                               const RobotState& state, const SphereSet& spheres) {
  CollisionCheck c;
  for (const auto& s : sphere_world_positions(model, state, spheres)) {
    const double d = sdf_query(scene, s.center).distance - s.radius;
    c.clearance = std::min(c.clearance, d);
  }
  c.collided = c.clearance < 0.0;
  return c;
}

const char* to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::kSuccess: return "success";
    case TrialStatus::kCollision: return "collision";
    case TrialStatus::kTimeout: return "timeout";
    case TrialStatus::kQpFailure: return "qp_failure";
  }
  return "unknown";
}

TrialStatus trial_status_from_string(const std::string& s) {
  if (s == "success") return TrialStatus::kSuccess;
  if (s == "collision") return TrialStatus::kCollision;
  if (s == "timeout") return TrialStatus::kTimeout;
  if (s == "qp_failure") return TrialStatus::kQpFailure;
  throw FormatError("unknown trial status '" + s + "'");
}

TrialResult run_trial(const SplatScene* splats, const PrimitiveScene& primitives,
                      const RobotState& start, const Pose& target, const RobotModel& model,
                      const SphereSet& spheres, Backend backend, const ControllerConfig& config,
                      const TrialOptions& options) {
  TrialResult r;
  const ObstacleScene scene{splats, &primitives};
  RobotState state = normalized(model, start);

  auto sample = [&](double t, const RobotState& s) {
    TrialSample out;
    out.time = t;
    out.state = s;
    out.ee = forward_kinematics(model, s).ee;
    out.clearance = check_collision(primitives, model, s, spheres).clearance;
    out.q_dot = VecX::Zero(model.n_dof());
    return out;
  };

  try {
    r.trajectory.push_back(sample(0.0, state));
    if (r.trajectory.back().clearance < 0.0) {
      r.status = TrialStatus::kCollision;
    } else {
      r.status = TrialStatus::kTimeout;
      for (int k = 0;; ++k) {
        const auto [et, er] = pose_error(r.trajectory.back().ee, target);
        if (et < config.tol_t && er < config.tol_R) {
          r.status = TrialStatus::kSuccess;
          break;
        }
        if (k >= options.max_steps) break;
        const ControlOutput u =
            control_step(model, spheres, state, target, scene, backend, config);
        if (u.diag.status != QPStatus::kOptimal) {
          r.status = TrialStatus::kQpFailure;
          r.error = std::string("qp ") + to_string(u.diag.status);
          r.trajectory.back().qp_status = u.diag.status;
          break;
        }
        state = integrate(model, state, u.q_dot, options.dt);
        ++r.steps;
        TrialSample s = sample(r.steps * options.dt, state);
        s.q_dot = u.q_dot;
        s.slack_norm = u.slack.norm();
        s.inequalities = u.diag.inequalities;
        s.active_constraints = u.diag.active_constraints;
        s.min_distance = u.diag.min_distance;
        s.qp_status = u.diag.status;
        s.qp_time_ms = u.diag.qp_time_ms;
        s.step_time_ms = u.diag.step_time_ms;
        r.trajectory.push_back(std::move(s));
        if (r.trajectory.back().clearance < 0.0) {
          r.status = TrialStatus::kCollision;
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    r.status = TrialStatus::kQpFailure;
    r.error = e.what();
  }
  if (!r.trajectory.empty()) {
    const auto [et, er] = pose_error(r.trajectory.back().ee, target);
    r.final_translation_error = et;
    r.final_rotation_error = er;
  }
  return r;
}

}  // namespace splatreach
