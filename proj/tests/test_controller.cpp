#include "support.hpp"

using namespace splatreach;
using namespace splatreach::test;

TEST_CASE("servo twist") {
  const Pose a = make_pose(rot_z(0.3), Vec3(1, 2, 3));
  CHECK(servo_twist(a, a, 1.5, 0.25, 0.5).norm() == 0.0);

  const Pose b = make_pose(rot_z(0.3), Vec3(1.1, 2, 3));
  const Vec6 v = servo_twist(a, b, 2.0, 10.0, 10.0);
  Vec6 expect;
  expect << 0.2, 0, 0, 0, 0, 0;
  CHECK((v - expect).norm() < 1e-12);

  const Pose c = make_pose(rot_z(0.3 + kPi - 1e-9), Vec3(1, 2, 3));
  CHECK(std::abs(servo_twist(a, c, 1.5, 0.25, 0.5)[5]) == doctest::Approx(0.5));

  // Rotation error is expressed in the world frame.
  const Pose d = make_pose(rot_x(0.1) * a.linear(), a.translation());
  const Vec6 w = servo_twist(a, d, 1.0, 1.0, 1.0);
  CHECK((w.tail<3>() - Vec3(0.1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("damper constraints") {
  std::vector<DistanceResult> r(3);
  r[0].d = 0.3;
  r[0].grad = Vec3(1, 0, 0);
  r[1].d = 0.02;
  r[1].grad = Vec3(0, 1, 0);
  r[2].d = -0.01;
  r[2].grad = Vec3(0, 0, 1);
  std::vector<MatX> J{MatX::Ones(3, 4), MatX::Constant(3, 9, 2.0), MatX::Identity(3, 2)};
  const auto c = build_damper_constraints(r, J, 0.3, 0.02, 1.0, 9);
  REQUIRE(c.A.rows() == 3);
  REQUIRE(c.A.cols() == 15);
  CHECK(c.b[0] == 1.0);
  CHECK(c.b[1] == 0.0);
  CHECK(c.b[2] < 0.0);
  // Sphere on an early link: later joints and all slack columns are zero.
  CHECK(c.A.row(0).tail(11).isZero(0.0));
  CHECK((c.A.row(0).head(4).array() == 1.0).all());
  CHECK(c.A.row(1).tail(6).isZero(0.0));

  const auto d = build_damper_constraints(r, J, 0.3, 0.02, 2.5, 9);
  CHECK(d.b[0] == 2.5);
  CHECK_THROWS_AS(build_damper_constraints(r, J, 0.02, 0.3, 1.0, 9), SpecError);

  // Identical results give bit-identical rows whichever backend produced them.
  std::vector<DistanceResult> r2 = r;
  for (auto& x : r2) {
    x.backend = Backend::kRaster;
    x.camera_id = 2;
  }
  const auto e = build_damper_constraints(r2, J, 0.3, 0.02, 1.0, 9);
  CHECK(e.A == c.A);
  CHECK(e.b == c.b);
}

TEST_CASE("active collision cost") {
  DamperConstraints empty;
  empty.A.resize(0, 15);
  empty.b.resize(0);
  CHECK(build_active_collision_cost(empty, 0.3, 0.02, 1.0, 2.0).isZero(0.0));

  std::vector<DistanceResult> r(1);
  r[0].d = 0.02;
  r[0].grad = Vec3(1, 0, 0);
  std::vector<MatX> J{MatX::Random(3, 9)};
  auto c = build_damper_constraints(r, J, 0.3, 0.02, 1.0, 9);
  VecX cost = build_active_collision_cost(c, 0.3, 0.02, 1.0, 2.0);
  CHECK((cost - 2.0 * c.A.row(0).transpose()).norm() < 1e-12);

  // Equal distances: the mean of the rows.
  r.resize(2);
  r[0].d = r[1].d = 0.1;
  r[1].grad = Vec3(0, 0, 1);
  J.push_back(MatX::Random(3, 9));
  c = build_damper_constraints(r, J, 0.3, 0.02, 1.0, 9);
  cost = build_active_collision_cost(c, 0.3, 0.02, 1.0, 2.0);
  const double w = (0.3 - 0.1) / (0.3 - 0.02);
  const VecX mean = 0.5 * (c.A.row(0) + c.A.row(1)).transpose();
  CHECK((cost - 2.0 * w * mean).norm() < 1e-12);

  // At the influence distance the weight and the cost vanish.
  r.resize(1);
  r[0].d = 0.3;
  J.resize(1);
  c = build_damper_constraints(r, J, 0.3, 0.02, 1.0, 9);
  CHECK(build_active_collision_cost(c, 0.3, 0.02, 1.0, 2.0).isZero(1e-15));
}

TEST_CASE("base orientation cost") {
  RobotState s;
  s.q_arm = VecX::Zero(7);
  const Pose ahead = make_pose(Mat3::Identity(), Vec3(2, 0, 1));
  CHECK(base_orientation_cost(s, ahead, 0.5, 9).isZero(0.0));

  const Pose left = make_pose(Mat3::Identity(), Vec3(0, 2, 1));
  VecX c = base_orientation_cost(s, left, 0.5, 9);
  // Minimising c^T q_dot favours positive rotation toward a target on the left.
  CHECK(c[1] < 0.0);
  CHECK(c[1] == doctest::Approx(-0.5 * kPi / 2));
  c[1] = 0.0;
  CHECK(c.isZero(0.0));

  Rng rng(5);
  for (int n = 0; n < 200; ++n) {
    const double a = rng.uniform(-3.0, 3.0);
    RobotState b;
    b.x = rng.uniform(-1, 1);
    b.y = rng.uniform(-1, 1);
    b.theta = rng.uniform(-kPi, kPi);
    const Vec3 dir(std::cos(b.theta + a), std::sin(b.theta + a), 0);
    const Vec3 dir_m(std::cos(b.theta - a), std::sin(b.theta - a), 0);
    const Vec3 base(b.x, b.y, 0.7);
    const double cp = base_orientation_cost(b, make_pose(Mat3::Identity(), base + 1.3 * dir), 0.7, 9)[1];
    const double cm = base_orientation_cost(b, make_pose(Mat3::Identity(), base + 1.3 * dir_m), 0.7, 9)[1];
    CHECK(cp == doctest::Approx(-cm).epsilon(1e-9));
    CHECK(cp == doctest::Approx(-0.7 * a).epsilon(1e-9));
  }
}

TEST_CASE("velocity bounds tighten near joint limits") {
  const RobotConfig& r = default_robot();
  ControllerConfig cfg;
  RobotState s = state_of(r.model, 0, 0, 0, r.start_q);
  auto [lb, ub] = velocity_bounds(r.model, s, cfg);
  CHECK(ub[0] == r.model.base.forward_velocity);
  CHECK(lb[1] == -r.model.base.turn_velocity);
  const auto& j0 = r.model.joints[0];
  s.q_arm[0] = j0.upper - cfg.joint_limit_buffer;
  std::tie(lb, ub) = velocity_bounds(r.model, s, cfg);
  CHECK(ub[2] == doctest::Approx(0.0));
  CHECK(lb[2] == -j0.velocity);
  s.q_arm[0] = j0.upper;
  std::tie(lb, ub) = velocity_bounds(r.model, s, cfg);
  CHECK(ub[2] < 0.0);
  CHECK(lb[2] <= ub[2]);
}

TEST_CASE("config validation") {
  ControllerConfig c;
  CHECK_NOTHROW(c.validate());
  c.d_i = 0.01;
  CHECK_THROWS_AS(c.validate(), SpecError);
  c = ControllerConfig{};
  c.k_e = -1;
  CHECK_THROWS_AS(c.validate(), SpecError);
  CHECK_THROWS_AS(backend_from_string("lidar"), SpecError);
}

TEST_CASE("control step at the target in free space") {
  const RobotConfig& r = default_robot();
  ControllerConfig cfg = default_controller();
  cfg.k_m = 0.0;  // the manipulability term moves the null space even at rest
  const RobotState s = state_of(r.model, 0, 0, 0, r.start_q);
  const Pose target = forward_kinematics(r.model, s).ee;
  PrimitiveScene empty;
  const ObstacleScene scene{nullptr, &empty};
  const ControlOutput out = control_step(r.model, r.spheres, s, target, scene, Backend::kGtSdf, cfg);
  REQUIRE(out.diag.status == QPStatus::kOptimal);
  CHECK(out.q_dot.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(out.diag.inequalities == 0);
}

TEST_CASE("control step at a constructed contact") {
  const RobotConfig& r = default_robot();
  const ControllerConfig cfg = default_controller();
  const RobotState s = state_of(r.model, 0, 0, 0, r.start_q);
  const auto fk = forward_kinematics(r.model, s);
  const auto placed = sphere_world_positions(r.model, fk, r.spheres);
  for (const Vec3 u : {Vec3(1, 0, 0), Vec3(0, 0, -1), Vec3(0, 1, 0)}) {
    // Wall whose face touches the sphere reaching farthest along u, at d_s.
    int k = 0;
    for (std::size_t i = 0; i < placed.size(); ++i)
      if (placed[i].center.dot(u) + placed[i].radius > placed[k].center.dot(u) + placed[k].radius)
        k = static_cast<int>(i);
    PrimitiveScene wall;
    Primitive b;
    const Vec3 dims = (Vec3::Ones() - u.cwiseAbs()) * 3.0 + u.cwiseAbs() * 0.1;
    b.dims = dims;
    b.pose = make_pose(Mat3::Identity(), placed[k].center + u * (placed[k].radius + cfg.d_s + 0.05));
    wall.primitives.push_back(b);
    REQUIRE(sdf_query(wall, placed[k].center).distance - placed[k].radius == doctest::Approx(cfg.d_s));

    // Target pulls the end effector into the wall.
    const Pose target = make_pose(fk.ee.linear(), fk.ee.translation() + 0.3 * u);
    const ObstacleScene scene{nullptr, &wall};
    const ControlOutput out = control_step(r.model, r.spheres, s, target, scene, Backend::kGtSdf, cfg);
    REQUIRE(out.diag.status == QPStatus::kOptimal);
    const MatX Jv = translational_jacobian(r.model, s, placed[k].link, r.spheres[k].offset);
    const double approach = u.dot(Jv * out.q_dot.head(Jv.cols()));
    CHECK(approach <= 1e-8);

    // Every emitted row and box bound holds.
    const auto results = query_distances(scene, Backend::kGtSdf, placed, cfg);
    const auto rows = damper_constraints_for(r.model, s, fk, placed, results, cfg);
    VecX x(r.model.n_dof() + 6);
    x << out.q_dot, out.slack;
    CHECK((rows.A * x - rows.b).maxCoeff() <= 1e-6);
    const auto [lb, ub] = velocity_bounds(r.model, s, cfg);
    CHECK((out.q_dot - ub).maxCoeff() <= 1e-6);
    CHECK((lb - out.q_dot).maxCoeff() <= 1e-6);
  }
}

TEST_CASE("control step needs the matching scene") {
  const RobotConfig& r = default_robot();
  const RobotState s = state_of(r.model, 0, 0, 0, r.start_q);
  const ObstacleScene none{};
  CHECK_THROWS_AS(control_step(r.model, r.spheres, s, Pose::Identity(), none, Backend::kGeometric, ControllerConfig{}),
                  SpecError);
}
