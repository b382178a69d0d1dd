#pragma once

#include <string>
#include <vector>

#include "splatreach/controller.hpp"

namespace splatreach {

/// First-order unicycle base plus arm, arm clamped to its position limits.
RobotState integrate(const RobotModel& model, const RobotState& state, const VecX& q_dot,
                     double dt);

struct CollisionCheck {
  bool collided = false;
  double clearance = std::numeric_limits<double>::infinity();
};

/// Minimum sphere clearance to the ground-truth primitives.
CollisionCheck check_collision(const PrimitiveScene& scene, const RobotModel& model,
                               const RobotState& state, const SphereSet& spheres);

enum class TrialStatus { kSuccess, kCollision, kTimeout, kQpFailure };

const char* to_string(TrialStatus s);
TrialStatus trial_status_from_string(const std::string& s);

/// One sample of a trial. Sample 0 is the start; sample k follows step k.
struct TrialSample {
  double time = 0.0;
  RobotState state;
  Pose ee = Pose::Identity();
  double clearance = 0.0;  // ground truth, m
  VecX q_dot;              // command that produced this sample (zero at the start)
  double slack_norm = 0.0;
  int inequalities = 0;
  int active_constraints = 0;
  double min_distance = std::numeric_limits<double>::infinity();  // as seen by the backend
  QPStatus qp_status = QPStatus::kOptimal;
  double qp_time_ms = 0.0;    // wall clock, kept out of deterministic outputs
  double step_time_ms = 0.0;  // wall clock
};

struct TrialResult {
  TrialStatus status = TrialStatus::kTimeout;
  int steps = 0;
  std::vector<TrialSample> trajectory;
  double final_translation_error = 0.0;
  double final_rotation_error = 0.0;
  std::string error;  // message when a step threw
};

struct TrialOptions {
  double dt = 0.05;
  int max_steps = 1200;
};

/// Closed-loop trial. Success is checked before every control step, collision
/// after every integration. Never throws: failures become status values.
TrialResult run_trial(const SplatScene* splats, const PrimitiveScene& primitives,
                      const RobotState& start, const Pose& target, const RobotModel& model,
                      const SphereSet& spheres, Backend backend, const ControllerConfig& config,
                      const TrialOptions& options = {});

}  // namespace splatreach
