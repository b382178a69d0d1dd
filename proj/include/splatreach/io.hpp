#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "splatreach/controller.hpp"
#include "splatreach/scene_gen.hpp"
#include "splatreach/sim.hpp"

namespace splatreach {

using Json = nlohmann::json;

/// {"xyz": [..], "quat": [w, x, y, z]} or {"xyz": [..], "rpy": [..]} (fixed-axis XYZ).
Pose pose_from_json(const Json& j);
Json pose_to_json(const Pose& p);

struct RobotConfig {
  RobotModel model;
  SphereSet spheres;
  VecX start_q;  // arm configuration at the start of every trial
};

RobotConfig robot_from_json(const Json& j);
ControllerConfig controller_from_json(const Json& j);
Json controller_to_json(const ControllerConfig& c);

Json scene_to_json(const GeneratedScene& s);
GeneratedScene scene_from_json(const Json& j);

/// Summary plus compact trajectory. Wall-clock timings are left out.
Json trial_to_json(const TrialResult& r);
TrialResult trial_from_json(const Json& j, int n_arm);
/// One JSON object per trajectory sample, without timings.
std::string trial_log_jsonl(const TrialResult& r);

Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

/// FNV-1a of the compact dump, as 16 hex digits.
std::string json_hash(const Json& j);

RobotState start_state(const RobotConfig& robot, const PrimitiveScene& scene);

}  // namespace splatreach
