#include "oracles.hpp"
#include "support.hpp"

using namespace splatreach;
using namespace splatreach::test;

namespace {

QPProblem scalar(double q, double c) {
  return QPProblem::unconstrained(MatX::Constant(1, 1, q), VecX::Constant(1, c));
}

}  // namespace

TEST_CASE("QP unit cases") {
  // min 1/2 x^2 - x
  QPSolution s = solve_qp(scalar(1, -1));
  REQUIRE(s.status == QPStatus::kOptimal);
  CHECK(s.x[0] == doctest::Approx(1.0));

  // Projection onto x1 + x2 = 1.
  QPProblem p = QPProblem::unconstrained(MatX::Identity(2, 2), VecX::Zero(2));
  p.A_eq = MatX::Ones(1, 2);
  p.b_eq = VecX::Ones(1);
  s = solve_qp(p);
  REQUIRE(s.status == QPStatus::kOptimal);
  CHECK((s.x - Eigen::Vector2d(0.5, 0.5)).norm() < 1e-12);

  // Clamped optimum with an active inequality.
  p = scalar(1, -4);
  p.A_in = MatX::Ones(1, 1);
  p.b_in = VecX::Ones(1);
  s = solve_qp(p);
  REQUIRE(s.status == QPStatus::kOptimal);
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.active_constraints == 1);

  // x <= -1 and x >= 1.
  p = scalar(1, 0);
  p.A_in.resize(2, 1);
  p.A_in << 1, -1;
  p.b_in.resize(2);
  p.b_in << -1, -1;
  CHECK(solve_qp(p).status == QPStatus::kInfeasible);

  // The same through bounds, and contradictory bounds are a spec error.
  p = scalar(1, -4);
  p.ub[0] = 1.0;
  s = solve_qp(p);
  CHECK(s.x[0] == doctest::Approx(1.0));
  p.lb[0] = 2.0;
  CHECK_THROWS_AS(solve_qp(p), SpecError);
}

TEST_CASE("QP validation") {
  QPProblem p = QPProblem::unconstrained(MatX::Identity(2, 2), VecX::Zero(3));
  CHECK_THROWS_AS(p.validate(), SpecError);
  MatX Q(2, 2);
  Q << 1, 0.5, 0, 1;
  p = QPProblem::unconstrained(Q, VecX::Zero(2));
  CHECK_THROWS_AS(p.validate(), SpecError);
}

TEST_CASE("QP iteration cap") {
  Rng rng(3);
  FuzzedQP f = fuzz_qp(rng, 12);
  while (f.p.A_in.rows() < 10) f = fuzz_qp(rng, 12);
  const QPSolution s = solve_qp(f.p, 1e-8, 1);
  CHECK(s.status == QPStatus::kMaxIter);
  CHECK(s.x.size() == 12);
}

TEST_CASE("QP fuzz: KKT residuals and sampled optimality") {
  Rng rng(17);
  int optimal = 0;
  for (int n = 0; n < 300; ++n) {
    const int dim = rng.uniform_int(1, 20);
    const FuzzedQP f = fuzz_qp(rng, dim);
    const QPSolution s = solve_qp(f.p);
    REQUIRE(s.status == QPStatus::kOptimal);
    ++optimal;
    CHECK(s.primal_residual <= 1e-8);
    CHECK(s.dual_residual <= 1e-8);
    CHECK(s.min_multiplier >= -1e-8);
    CHECK(max_violation(f.p, s.x) <= 1e-8);
    const double best = best_sampled_objective(f.p, s.x, f.feasible, rng, 2000);
    const double fx = f.p.objective(s.x);
    CHECK(best >= fx - 1e-9 * std::max(1.0, std::abs(fx)));
    // Deterministic.
    CHECK(solve_qp(f.p).x == s.x);
  }
  CHECK(optimal == 300);
}
