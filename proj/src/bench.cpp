#include "splatreach/bench.hpp"

#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

namespace splatreach {

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json("N/A"); }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string cell17(const Json& v) { return v.is_number() ? fmt17(v.get<double>()) : v.get<std::string>(); }

std::string cell3(const Json& v) {
  if (!v.is_number()) return v.get<std::string>();
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v.get<double>());
  return buf;
}

}  // namespace

double trial_mean_clearance(const TrialResult& r) {
  std::vector<double> c;
  for (const auto& s : r.trajectory)
    if (std::isfinite(s.clearance)) c.push_back(s.clearance);
  return mean(c);
}

double trial_gracefulness(const TrialResult& r, double dt) {
  const auto& t = r.trajectory;
  if (t.size() < 3) return 0.0;
  double s = 0.0;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const Vec3 a = (t[k + 1].ee.translation() - 2.0 * t[k].ee.translation() + t[k - 1].ee.translation()) /
                   (dt * dt);
    s += a.norm();
  }
  return s / static_cast<double>(t.size() - 2);
}

double trial_path_length(const TrialResult& r) {
  double L = 0.0;
  for (std::size_t k = 1; k < r.trajectory.size(); ++k)
    L += (r.trajectory[k].ee.translation() - r.trajectory[k - 1].ee.translation()).norm();
  return L;
}

MetricsRecord compute_metrics(const std::vector<const TrialResult*>& trials,
                              const std::vector<bool>& common, double dt) {
  if (trials.empty()) throw SpecError("metrics need at least one trial");
  if (common.size() != trials.size()) throw SpecError("one common-success flag per trial");
  MetricsRecord m;
  m.trials = static_cast<int>(trials.size());
  std::vector<double> clear, grace, length, qp, step, ineq;
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const TrialResult& r = *trials[k];
    if (r.status == TrialStatus::kSuccess) ++m.successes;
    if (r.status == TrialStatus::kCollision) ++m.collisions;
    for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
      qp.push_back(r.trajectory[i].qp_time_ms);
      step.push_back(r.trajectory[i].step_time_ms);
      ineq.push_back(r.trajectory[i].inequalities);
    }
    if (!common[k]) continue;
    ++m.common;
    clear.push_back(trial_mean_clearance(r));
    grace.push_back(trial_gracefulness(r, dt));
    length.push_back(trial_path_length(r));
  }
  m.success_rate = static_cast<double>(m.successes) / m.trials;
  m.collision_rate = static_cast<double>(m.collisions) / m.trials;
  if (m.common > 0) {
    m.avg_distance = mean(clear);
    m.gracefulness = mean(grace);
    m.path_length = mean(length);
  }
  m.mean_inequalities = mean(ineq);
  m.qp_time_mean_ms = mean(qp);
  m.qp_time_std_ms = stddev(qp);
  const double step_ms = mean(step);
  m.control_rate_hz = step_ms > 0.0 ? 1000.0 / step_ms : 0.0;
  return m;
}

std::string BenchConfig::label() const {
  std::string s = to_string(backend);
  s += inequalities ? "/ineq" : "/no-ineq";
  s += active_cost ? "/active" : "/no-active";
  return s;
}

SuiteSpec suite_from_json(const Json& j) {
  SuiteSpec s;
  if (j.contains("kinds")) {
    s.kinds.clear();
    for (const auto& k : j.at("kinds"))
      s.kinds.push_back({scene_kind_from_string(k.at("kind").get<std::string>()), k.at("count").get<int>()});
  }
  s.seed = j.value("seed", s.seed);
  if (j.contains("backends")) {
    s.backends.clear();
    for (const auto& b : j.at("backends")) s.backends.push_back(backend_from_string(b.get<std::string>()));
  }
  if (j.contains("active_cost")) s.active_cost = j.at("active_cost").get<std::vector<bool>>();
  if (j.contains("inequalities")) s.inequalities = j.at("inequalities").get<std::vector<bool>>();
  s.targets = j.value("targets", s.targets);
  s.floaters = j.value("floaters", s.floaters);
  s.dt = j.value("dt", s.dt);
  s.max_steps = j.value("max_steps", s.max_steps);
  if (j.contains("sampling")) {
    const Json& sp = j.at("sampling");
    s.sampling.spacing = sp.value("spacing", s.sampling.spacing);
    s.sampling.sigma_ratio = sp.value("sigma_ratio", s.sampling.sigma_ratio);
    s.sampling.jitter = sp.value("jitter", s.sampling.jitter);
    s.sampling.opacity = sp.value("opacity", s.sampling.opacity);
  }
  if (j.contains("controller")) s.controller = j.at("controller");
  for (const auto& k : s.kinds)
    if (k.count < 0) throw SpecError("scene count must be non-negative");
  if (s.backends.empty() || s.active_cost.empty() || s.inequalities.empty())
    throw SpecError("suite needs at least one backend and toggle value");
  if (!(s.dt > 0.0) || s.max_steps < 0 || s.targets < 1 || s.floaters < 0)
    throw SpecError("invalid suite timing or target count");
  return s;
}

Json suite_to_json(const SuiteSpec& s) {
  Json j;
  Json kinds = Json::array();
  for (const auto& k : s.kinds) kinds.push_back({{"kind", to_string(k.kind)}, {"count", k.count}});
  j["kinds"] = kinds;
  j["seed"] = s.seed;
  Json b = Json::array();
  for (auto be : s.backends) b.push_back(to_string(be));
  j["backends"] = b;
  j["active_cost"] = s.active_cost;
  j["inequalities"] = s.inequalities;
  j["targets"] = s.targets;
  j["floaters"] = s.floaters;
  j["dt"] = s.dt;
  j["max_steps"] = s.max_steps;
  j["sampling"] = {{"spacing", s.sampling.spacing},
                   {"sigma_ratio", s.sampling.sigma_ratio},
                   {"jitter", s.sampling.jitter},
                   {"opacity", s.sampling.opacity}};
  j["controller"] = s.controller.is_null() ? Json::object() : s.controller;
  return j;
}

std::uint64_t scene_seed(std::uint64_t suite_seed, SceneKind kind, int index) {
  Rng rng(suite_seed * 1000003ULL + static_cast<std::uint64_t>(kind) * 7919ULL +
          static_cast<std::uint64_t>(index));
  return rng.next_u64();
}

SceneBundle build_scene(SceneKind kind, int index, const SuiteSpec& spec, const RobotConfig& robot) {
  SceneBundle b;
  GeneratorOptions go;
  go.targets = spec.targets;
  go.sampling = spec.sampling;
  const std::uint64_t seed = scene_seed(spec.seed, kind, index);
  b.scene = generate_scene(kind, index, seed, robot.model, robot.spheres, go);
  b.splats = SplatScene(sample_surface_splats(b.scene.primitives, spec.sampling, seed ^ 0x5bd1e995ULL));
  if (spec.floaters > 0) {
    FloaterSpec fs;
    fs.count = spec.floaters;
    fs.seed = seed ^ 0x27d4eb2fULL;
    b.splats = inject_floaters(b.splats, fs);
  }
  return b;
}

BenchReport run_benchmark(const SuiteSpec& spec, const RobotConfig& robot,
                          const ControllerConfig& base, std::ostream* progress) {
  BenchReport rep;
  rep.config_hash = json_hash({{"suite", suite_to_json(spec)}, {"controller", controller_to_json(base)}});
  std::vector<BenchConfig> configs;
  for (auto b : spec.backends)
    for (bool ineq : spec.inequalities)
      for (bool ac : spec.active_cost) configs.push_back({b, ineq, ac});

  TrialOptions opts;
  opts.dt = spec.dt;
  opts.max_steps = spec.max_steps;
  rep.scenes = Json::array();

  for (const auto& sk : spec.kinds) {
    for (int i = 0; i < sk.count; ++i) {
      const SceneBundle b = build_scene(sk.kind, i, spec, robot);
      rep.scenes.push_back({{"kind", to_string(sk.kind)},
                            {"id", i},
                            {"seed", b.scene.seed},
                            {"splats", b.splats.size()},
                            {"primitives", b.scene.primitives.primitives.size()}});
      const RobotState start = start_state(robot, b.scene.primitives);
      for (std::size_t t = 0; t < b.scene.primitives.targets.size(); ++t) {
        for (const auto& cfg : configs) {
          ControllerConfig cc = base;
          cc.inequalities = cfg.inequalities;
          cc.active_cost = cfg.active_cost;
          BenchTrial bt;
          bt.config = cfg.label();
          bt.kind = sk.kind;
          bt.scene = i;
          bt.target = static_cast<int>(t);
          bt.result = run_trial(&b.splats, b.scene.primitives, start, b.scene.primitives.targets[t],
                                robot.model, robot.spheres, cfg.backend, cc, opts);
          if (progress)
            *progress << to_string(sk.kind) << " " << i << "/" << t << " " << bt.config << " "
                      << to_string(bt.result.status) << " steps=" << bt.result.steps << "\n"
                      << std::flush;
          rep.trials.push_back(std::move(bt));
        }
      }
    }
  }

  // Common successes: the (scene, target) pairs every configuration solved.
  std::map<std::tuple<int, int, int>, int> solved;
  for (const auto& t : rep.trials)
    if (t.result.status == TrialStatus::kSuccess)
      ++solved[{static_cast<int>(t.kind), t.scene, t.target}];
  const int n_cfg = static_cast<int>(configs.size());

  std::vector<std::string> scopes{"all"};
  for (const auto& sk : spec.kinds) scopes.push_back(to_string(sk.kind));
  for (const auto& scope : scopes) {
    for (const auto& cfg : configs) {
      std::vector<const TrialResult*> trials;
      std::vector<bool> common;
      for (const auto& t : rep.trials) {
        if (t.config != cfg.label()) continue;
        if (scope != "all" && scope != to_string(t.kind)) continue;
        trials.push_back(&t.result);
        const auto it = solved.find({static_cast<int>(t.kind), t.scene, t.target});
        common.push_back(it != solved.end() && it->second == n_cfg);
      }
      if (trials.empty()) continue;
      rep.rows.push_back({scope, cfg, compute_metrics(trials, common, spec.dt)});
    }
  }
  return rep;
}

Json report_to_json(const BenchReport& report, const SuiteSpec& spec) {
  Json j;
  j["schema"] = "splatreach-bench/1";
  j["config_hash"] = report.config_hash;
  j["suite"] = suite_to_json(spec);
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    const auto& m = r.metrics;
    rows.push_back({{"scope", r.scope},
                    {"backend", to_string(r.config.backend)},
                    {"inequalities", r.config.inequalities},
                    {"active_cost", r.config.active_cost},
                    {"trials", m.trials},
                    {"successes", m.successes},
                    {"collisions", m.collisions},
                    {"common", m.common},
                    {"success_rate", m.success_rate},
                    {"collision_rate", m.collision_rate},
                    {"avg_distance", opt_json(m.avg_distance)},
                    {"gracefulness", opt_json(m.gracefulness)},
                    {"path_length", opt_json(m.path_length)},
                    {"mean_inequalities", m.mean_inequalities}});
  }
  j["rows"] = rows;
  j["scenes"] = report.scenes;
  Json trials = Json::array();
  for (const auto& t : report.trials) {
    trials.push_back({{"config", t.config},
                      {"kind", to_string(t.kind)},
                      {"scene", t.scene},
                      {"target", t.target},
                      {"status", to_string(t.result.status)},
                      {"steps", t.result.steps},
                      {"mean_clearance", trial_mean_clearance(t.result)},
                      {"path_length", trial_path_length(t.result)}});
  }
  j["trials"] = trials;
  return j;
}

std::string report_csv(const Json& results) {
  std::ostringstream os;
  os << "scope,backend,inequalities,active_cost,trials,successes,collisions,common,success_rate,"
        "collision_rate,avg_distance,gracefulness,path_length,mean_inequalities\n";
  for (const auto& r : results.at("rows")) {
    os << r.at("scope").get<std::string>() << ',' << r.at("backend").get<std::string>() << ','
       << (r.at("inequalities").get<bool>() ? "on" : "off") << ','
       << (r.at("active_cost").get<bool>() ? "on" : "off") << ',' << r.at("trials").get<int>() << ','
       << r.at("successes").get<int>() << ',' << r.at("collisions").get<int>() << ','
       << r.at("common").get<int>() << ',' << cell17(r.at("success_rate")) << ','
       << cell17(r.at("collision_rate")) << ',' << cell17(r.at("avg_distance")) << ','
       << cell17(r.at("gracefulness")) << ',' << cell17(r.at("path_length")) << ','
       << cell17(r.at("mean_inequalities")) << '\n';
  }
  return os.str();
}

std::string report_markdown(const Json& results) {
  std::ostringstream os;
  os << "| Scope | Distance | Inequalities | Active cost | Success | D_avg* (m) | mean \\|a_eef\\|* (m/s^2) | "
        "L* (m) | Coll. | Rows/step |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : results.at("rows")) {
    os << "| " << r.at("scope").get<std::string>() << " | " << r.at("backend").get<std::string>()
       << " | " << (r.at("inequalities").get<bool>() ? "yes" : "no") << " | "
       << (r.at("active_cost").get<bool>() ? "yes" : "no") << " | " << cell3(r.at("success_rate"))
       << " | " << cell3(r.at("avg_distance")) << " | " << cell3(r.at("gracefulness")) << " | "
       << cell3(r.at("path_length")) << " | " << r.at("collisions").get<int>() << " | "
       << cell3(r.at("mean_inequalities")) << " |\n";
  }
  os << "\nStarred metrics cover trials solved by every configuration.\n";
  return os.str();
}

void write_benchmark(const BenchReport& report, const SuiteSpec& spec,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Json j = report_to_json(report, spec);
  write_json(j, dir / "results.json");
  write_text(report_csv(j), dir / "results.csv");
  write_text(report_markdown(j), dir / "results.md");
  Json timing = Json::array();
  for (const auto& r : report.rows) {
    timing.push_back({{"scope", r.scope},
                      {"config", r.config.label()},
                      {"qp_time_mean_ms", r.metrics.qp_time_mean_ms},
                      {"qp_time_std_ms", r.metrics.qp_time_std_ms},
                      {"control_rate_hz", r.metrics.control_rate_hz}});
  }
  write_json(timing, dir / "timing.json");
}

}  // namespace splatreach
