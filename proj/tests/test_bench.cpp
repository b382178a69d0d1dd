#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace splatreach;
using namespace splatreach::test;

namespace {

TrialResult path(const std::vector<Vec3>& points, TrialStatus status = TrialStatus::kSuccess) {
  TrialResult r;
  r.status = status;
  for (const auto& p : points) {
    TrialSample s;
    s.ee = make_pose(Mat3::Identity(), p);
    s.clearance = 0.1;
    r.trajectory.push_back(s);
  }
  r.steps = static_cast<int>(points.size()) - 1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SuiteSpec tiny_suite() {
  SuiteSpec s;
  s.kinds = {{SceneKind::kTable, 1}, {SceneKind::kBookshelf, 1}};
  s.backends = {Backend::kGtSdf, Backend::kGeometric};
  s.max_steps = 60;
  return s;
}

}  // namespace

TEST_CASE("trajectory metrics") {
  const TrialResult still = path({Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(1, 1, 1)});
  CHECK(trial_path_length(still) == 0.0);
  CHECK(trial_gracefulness(still, 0.05) == 0.0);

  CHECK(trial_path_length(path({Vec3(0, 0, 0), Vec3(1, 0, 0)})) == doctest::Approx(1.0));

  std::vector<Vec3> line;
  for (int k = 0; k < 20; ++k) line.push_back(Vec3(0.1, 0.2, 0.3) + 0.0125 * k * Vec3(1, -2, 0.5));
  CHECK(trial_gracefulness(path(line), 0.05) < 1e-9);

  // Constant acceleration a: second difference / dt^2 = a.
  std::vector<Vec3> para;
  for (int k = 0; k < 10; ++k) para.push_back(Vec3(0.5 * 2.0 * std::pow(0.05 * k, 2), 0, 0));
  CHECK(trial_gracefulness(path(para), 0.05) == doctest::Approx(2.0));
}

TEST_CASE("compute_metrics and the common-success filter") {
  const TrialResult ok = path({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  const TrialResult bad = path({Vec3(0, 0, 0), Vec3(0.5, 0, 0)}, TrialStatus::kCollision);
  const MetricsRecord m = compute_metrics({&ok, &bad}, {true, false}, 0.05);
  CHECK(m.success_rate == 0.5);
  CHECK(m.collision_rate == 0.5);
  CHECK(m.common == 1);
  CHECK(*m.path_length == doctest::Approx(1.0));
  CHECK(*m.avg_distance == doctest::Approx(0.1));

  const MetricsRecord none = compute_metrics({&bad}, {false}, 0.05);
  CHECK_FALSE(none.avg_distance.has_value());
  CHECK_FALSE(none.path_length.has_value());
  CHECK_THROWS_AS(compute_metrics({}, {}, 0.05), SpecError);
}

TEST_CASE("benchmark rows, determinism and round trips") {
  const RobotConfig& robot = default_robot();
  const ControllerConfig cfg = default_controller();
  const SuiteSpec spec = tiny_suite();
  const BenchReport a = run_benchmark(spec, robot, cfg);
  const BenchReport b = run_benchmark(spec, robot, cfg);

  // Two rows (active cost off/on) per backend and scope.
  int all_rows = 0;
  for (const auto& r : a.rows) all_rows += r.scope == "all";
  CHECK(all_rows == 4);
  CHECK(a.rows.size() == 12);

  const auto d1 = temp_dir("bench_a");
  const auto d2 = temp_dir("bench_b");
  write_benchmark(a, spec, d1);
  write_benchmark(b, spec, d2);
  CHECK(slurp(d1 / "results.csv") == slurp(d2 / "results.csv"));
  CHECK(slurp(d1 / "results.json") == slurp(d2 / "results.json"));
  CHECK(slurp(d1 / "results.md") == slurp(d2 / "results.md"));
  CHECK(std::filesystem::exists(d1 / "timing.json"));

  // JSON and CSV carry the metric values exactly.
  const Json j = read_json(d1 / "results.json");
  CHECK(j.at("schema") == "splatreach-bench/1");
  CHECK(j.at("config_hash").get<std::string>().size() == 16);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& m = a.rows[i].metrics;
    const Json& r = j.at("rows")[i];
    CHECK(r.at("success_rate").get<double>() == m.success_rate);
    CHECK(r.at("mean_inequalities").get<double>() == m.mean_inequalities);
    if (m.avg_distance) CHECK(r.at("avg_distance").get<double>() == *m.avg_distance);
    else CHECK(r.at("avg_distance") == "N/A");
  }
  std::istringstream csv(slurp(d1 / "results.csv"));
  std::string line;
  std::getline(csv, line);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    REQUIRE(std::getline(csv, line));
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 14);
    CHECK(std::stod(cells[8]) == a.rows[i].metrics.success_rate);
    if (a.rows[i].metrics.path_length) CHECK(std::stod(cells[12]) == *a.rows[i].metrics.path_length);
  }

  // Suite spec round trip.
  CHECK(suite_to_json(suite_from_json(suite_to_json(spec))).dump() == suite_to_json(spec).dump());
}

TEST_CASE("a failure in one configuration leaves the others' success rates alone") {
  const TrialResult s1 = path({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  const TrialResult s2 = path({Vec3(0, 0, 0), Vec3(2, 0, 0)});
  const TrialResult f = path({Vec3(0, 0, 0)}, TrialStatus::kTimeout);
  // Config A solved both; config B solved both, then B fails the second.
  const MetricsRecord a_before = compute_metrics({&s1, &s2}, {true, true}, 0.05);
  const MetricsRecord a_after = compute_metrics({&s1, &s2}, {true, false}, 0.05);
  CHECK(a_before.success_rate == a_after.success_rate);
  CHECK(a_after.common < a_before.common);
  const MetricsRecord b_after = compute_metrics({&s1, &f}, {true, false}, 0.05);
  CHECK(b_after.success_rate == 0.5);
}

TEST_CASE("io round trips") {
  const RobotConfig& robot = default_robot();
  const GeneratedScene g = generate_scene(SceneKind::kBookshelf, 3, 77, robot.model, robot.spheres, {2});
  const GeneratedScene back = scene_from_json(scene_to_json(g));
  REQUIRE(back.primitives.primitives.size() == g.primitives.primitives.size());
  for (std::size_t i = 0; i < g.primitives.primitives.size(); ++i) {
    CHECK(back.primitives.primitives[i].dims == g.primitives.primitives[i].dims);
    CHECK(back.primitives.primitives[i].pose.isApprox(g.primitives.primitives[i].pose, 1e-14));
  }
  for (std::size_t i = 0; i < g.primitives.targets.size(); ++i)
    CHECK(back.primitives.targets[i].isApprox(g.primitives.targets[i], 1e-14));
  CHECK(back.primitives.targets.size() == 2);

  const ControllerConfig c = default_controller();
  CHECK(controller_to_json(controller_from_json(controller_to_json(c))).dump() == controller_to_json(c).dump());

  const Pose p = make_pose(rot_z(0.4) * rot_x(-1.2), Vec3(0.1, -2, 3));
  CHECK((pose_from_json(pose_to_json(p)).matrix() - p.matrix()).cwiseAbs().maxCoeff() < 1e-15);
  const Pose q = pose_from_json(Json{{"xyz", {0, 0, 0}}, {"rpy", {0, 0, kPi / 2}}});
  CHECK((q.linear() - rot_z(kPi / 2)).cwiseAbs().maxCoeff() < 1e-15);

  const TrialResult t = path({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  TrialResult tt = t;
  for (auto& s : tt.trajectory) {
    s.state.q_arm = VecX::Zero(7);
    s.q_dot = VecX::Zero(9);
  }
  const TrialResult tb = trial_from_json(trial_to_json(tt), 7);
  CHECK(tb.status == tt.status);
  CHECK(tb.trajectory.size() == tt.trajectory.size());
  CHECK(trial_to_json(tb).dump() == trial_to_json(tt).dump());

  CHECK(json_hash(Json{{"a", 1}}) == json_hash(Json{{"a", 1}}));
  CHECK(json_hash(Json{{"a", 1}}) != json_hash(Json{{"a", 2}}));
}
