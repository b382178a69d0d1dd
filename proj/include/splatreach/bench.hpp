#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "splatreach/io.hpp"

namespace splatreach {

/// Aggregate over a set of trials. Starred metrics (avg_distance, gracefulness,
/// path_length) cover only the trials flagged as common successes and are
/// empty when that set is empty.
struct MetricsRecord {
  int trials = 0;
  int successes = 0;
  int collisions = 0;
  int common = 0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  std::optional<double> avg_distance;  // m
  std::optional<double> gracefulness;  // m/s^2, mean |a_eef|
  std::optional<double> path_length;   // m
  double mean_inequalities = 0.0;      // damper rows per step
  // Wall-clock figures; reported separately from the deterministic outputs.
  double qp_time_mean_ms = 0.0;
  double qp_time_std_ms = 0.0;
  double control_rate_hz = 0.0;
};

/// Mean over steps of the ground-truth clearance (inf samples skipped).
double trial_mean_clearance(const TrialResult& r);
/// Mean |second difference of end-effector position| / dt^2.
double trial_gracefulness(const TrialResult& r, double dt);
double trial_path_length(const TrialResult& r);

MetricsRecord compute_metrics(const std::vector<const TrialResult*>& trials,
                              const std::vector<bool>& common, double dt);

struct BenchConfig {
  Backend backend = Backend::kGeometric;
  bool inequalities = true;
  bool active_cost = true;
  std::string label() const;
};

struct SuiteKind {
  SceneKind kind = SceneKind::kTable;
  int count = 50;
};

struct SuiteSpec {
  std::vector<SuiteKind> kinds{{SceneKind::kTable, 50}, {SceneKind::kBookshelf, 50}};
  std::uint64_t seed = 1;
  std::vector<Backend> backends{Backend::kGtSdf, Backend::kGeometric, Backend::kRaster};
  std::vector<bool> active_cost{false, true};
  std::vector<bool> inequalities{true};
  int targets = 1;
  int floaters = 0;  // injected per scene when > 0
  double dt = 0.05;
  int max_steps = 1200;
  SurfaceSampling sampling;
  Json controller;  // overrides applied on top of the controller file
};

SuiteSpec suite_from_json(const Json& j);
Json suite_to_json(const SuiteSpec& s);

/// Scene seed derived from the suite seed, the kind and the index.
std::uint64_t scene_seed(std::uint64_t suite_seed, SceneKind kind, int index);

struct SceneBundle {
  GeneratedScene scene;
  SplatScene splats;
};

/// Generated scene plus its surface splats (and floaters when requested).
SceneBundle build_scene(SceneKind kind, int index, const SuiteSpec& spec, const RobotConfig& robot);

struct BenchTrial {
  std::string config;
  SceneKind kind = SceneKind::kTable;
  int scene = 0;
  int target = 0;
  TrialResult result;
};

struct BenchRow {
  std::string scope;  // "all" or a scene kind
  BenchConfig config;
  MetricsRecord metrics;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchTrial> trials;
  Json scenes;  // per-scene splat counts
  std::string config_hash;
};

/// Runs every (scene x target x config) trial. `progress` may be null.
BenchReport run_benchmark(const SuiteSpec& spec, const RobotConfig& robot,
                          const ControllerConfig& base, std::ostream* progress = nullptr);

/// results.json, results.csv, results.md (deterministic) and timing.json.
void write_benchmark(const BenchReport& report, const SuiteSpec& spec,
                     const std::filesystem::path& dir);

Json report_to_json(const BenchReport& report, const SuiteSpec& spec);
std::string report_csv(const Json& results);
std::string report_markdown(const Json& results);

}  // namespace splatreach
