// Command-line front end: scene generation, single trials, benchmarks, reports
// and floater injection.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "splatreach/bench.hpp"
#include "splatreach/distance_raster.hpp"
#include "splatreach/io.hpp"

#ifndef SPLATREACH_CONFIG_DIR
#define SPLATREACH_CONFIG_DIR "config"
#endif

using namespace splatreach;
namespace fs = std::filesystem;

namespace {

const std::string kDefaultRobot = std::string(SPLATREACH_CONFIG_DIR) + "/robot_default.json";
const std::string kDefaultController = std::string(SPLATREACH_CONFIG_DIR) + "/controller_default.json";

Activation activation_from(const std::string& s) {
  if (s == "raw") return Activation::kRaw;
  if (s == "standard") return Activation::kStandard;
  throw SpecError("unknown activation '" + s + "'");
}

bool on_off(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw SpecError("expected on or off, got '" + s + "'");
}

std::string scene_stem(SceneKind kind, int id) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d", to_string(kind), id);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reactive mobile-manipulation control over Gaussian-splat scenes"};
  app.require_subcommand(1);

  std::string robot_path = kDefaultRobot;
  std::string config_path = kDefaultController;
  app.add_option("--robot", robot_path, "Robot description (JSON)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate table or bookshelf scenes");
  std::string kind = "table";
  int count = 1;
  std::uint64_t seed = 1;
  std::string out;
  int targets = 1;
  int floaters = 0;
  std::string activation = "standard";
  gen->add_option("--kind", kind, "table | bookshelf")->check(CLI::IsMember({"table", "bookshelf"}));
  gen->add_option("--count", count)->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed);
  gen->add_option("--targets", targets, "Targets per scene")->check(CLI::PositiveNumber);
  gen->add_option("--floaters", floaters, "Floaters injected into each splat file");
  gen->add_option("--activation", activation, "PLY encoding: standard | raw");
  gen->add_option("--out", out)->required();

  // run
  auto* run = app.add_subcommand("run", "Run one closed-loop trial");
  std::string scene_path, splat_path, backend = "geometric", active = "on", ineq = "on", log_path;
  std::string depth_dir;
  int target_index = 0;
  int max_steps = 1200;
  double dt = 0.05;
  run->add_option("--scene", scene_path)->required();
  run->add_option("--splats", splat_path, "Splat PLY (needed by the splat backends)");
  run->add_option("--backend", backend)->check(CLI::IsMember({"geometric", "raster", "gt-sdf"}));
  run->add_option("--active-cost", active)->check(CLI::IsMember({"on", "off"}));
  run->add_option("--inequalities", ineq)->check(CLI::IsMember({"on", "off"}));
  run->add_option("--config", config_path);
  run->add_option("--target", target_index);
  run->add_option("--max-steps", max_steps);
  run->add_option("--dt", dt);
  run->add_option("--activation", activation);
  run->add_option("--log", log_path, "Per-step JSON lines");
  run->add_option("--dump-depth", depth_dir, "Write the start-state depth maps (PFM)");
  run->add_option("--out", out)->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  std::string suite_path;
  bool verbose = false;
  bench->add_option("--suite", suite_path)->required();
  bench->add_option("--config", config_path);
  bench->add_option("--out", out)->required();
  bench->add_flag("--verbose", verbose, "Print one line per trial");

  // report
  auto* report = app.add_subcommand("report", "Print a benchmark table");
  std::string in_dir, format = "md";
  report->add_option("--in", in_dir)->required();
  report->add_option("--format", format)->check(CLI::IsMember({"csv", "json", "md"}));

  // inject-noise
  auto* noise = app.add_subcommand("inject-noise", "Add low-opacity floaters to a splat file");
  int n_floaters = 1000;
  noise->add_option("--splats", splat_path)->required();
  noise->add_option("--n", n_floaters)->check(CLI::NonNegativeNumber);
  noise->add_option("--seed", seed);
  noise->add_option("--activation", activation);
  noise->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const RobotConfig robot = robot_from_json(read_json(robot_path));
      GeneratorOptions go;
      go.targets = targets;
      fs::create_directories(out);
      for (int i = 0; i < count; ++i) {
        const SceneKind k = scene_kind_from_string(kind);
        const std::uint64_t s = scene_seed(seed, k, i);
        const GeneratedScene g = generate_scene(k, i, s, robot.model, robot.spheres, go);
        SplatScene splats(sample_surface_splats(g.primitives, go.sampling, s ^ 0x5bd1e995ULL));
        if (floaters > 0) splats = inject_floaters(splats, {floaters, s ^ 0x27d4eb2fULL});
        const std::string stem = scene_stem(k, i);
        write_json(scene_to_json(g), fs::path(out) / (stem + ".json"));
        write_scene(splats, fs::path(out) / (stem + ".ply"), activation_from(activation));
        std::cout << stem << " splats=" << splats.size() << "\n";
      }
    } else if (*run) {
      const RobotConfig robot = robot_from_json(read_json(robot_path));
      ControllerConfig cfg = controller_from_json(read_json(config_path));
      cfg.active_cost = on_off(active);
      cfg.inequalities = on_off(ineq);
      const GeneratedScene g = scene_from_json(read_json(scene_path));
      if (target_index < 0 || target_index >= static_cast<int>(g.primitives.targets.size()))
        throw SpecError("target index out of range");
      const Backend b = backend_from_string(backend);
      SplatScene splats;
      if (!splat_path.empty()) splats = load_scene(splat_path, activation_from(activation));
      if (b != Backend::kGtSdf && splat_path.empty()) throw SpecError("--splats is required for " + backend);
      const RobotState start = start_state(robot, g.primitives);
      if (!depth_dir.empty()) {
        fs::create_directories(depth_dir);
        VirtualSensor sensor;
        sensor.K = Intrinsics::fov90(cfg.raster.resolution);
        for (const auto& s : sphere_world_positions(robot.model, start, robot.spheres)) {
          sensor.pose = make_pose(Mat3::Identity(), s.center);
          sensor.radius = s.radius;
          std::array<DepthMap, 6> maps;
          sensor_distance(splats, sensor, cfg.d_i, cfg.raster, &maps);
          for (int c = 0; c < 6; ++c)
            write_pfm(maps[c], fs::path(depth_dir) /
                                   ("sphere" + std::to_string(s.id) + "_cam" + std::to_string(c) + ".pfm"));
        }
      }
      TrialOptions opts;
      opts.dt = dt;
      opts.max_steps = max_steps;
      const TrialResult r = run_trial(splat_path.empty() ? nullptr : &splats, g.primitives, start,
                                      g.primitives.targets[target_index], robot.model, robot.spheres,
                                      b, cfg, opts);
      write_json(trial_to_json(r), out);
      if (!log_path.empty()) write_text(trial_log_jsonl(r), log_path);
      std::cout << to_string(r.status) << " steps=" << r.steps << "\n";
    } else if (*bench) {
      const RobotConfig robot = robot_from_json(read_json(robot_path));
      const SuiteSpec spec = suite_from_json(read_json(suite_path));
      Json cj = read_json(config_path);
      if (spec.controller.is_object()) cj.merge_patch(spec.controller);
      const ControllerConfig cfg = controller_from_json(cj);
      const BenchReport rep = run_benchmark(spec, robot, cfg, verbose ? &std::cerr : nullptr);
      write_benchmark(rep, spec, out);
      std::cout << report_markdown(report_to_json(rep, spec));
    } else if (*report) {
      const Json results = read_json(fs::path(in_dir) / "results.json");
      if (format == "json") std::cout << results.at("rows").dump(2) << "\n";
      else if (format == "csv") std::cout << report_csv(results);
      else std::cout << report_markdown(results);
    } else if (*noise) {
      const Activation a = activation_from(activation);
      const SplatScene scene = load_scene(splat_path, a);
      FloaterSpec fs_spec;
      fs_spec.count = n_floaters;
      fs_spec.seed = seed;
      write_scene(inject_floaters(scene, fs_spec), out, a);
      std::cout << "splats=" << scene.size() + static_cast<std::size_t>(n_floaters) << "\n";
    }
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
