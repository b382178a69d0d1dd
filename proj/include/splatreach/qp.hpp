#pragma once

#include "splatreach/core.hpp"

namespace splatreach {

/// min 1/2 x^T Q x + c^T x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  lb <= x <= ub.
/// Empty A_eq / A_in are allowed; infinite bounds are ignored.
struct QPProblem {
  MatX Q;
  VecX c;
  MatX A_eq;
  VecX b_eq;
  MatX A_in;
  VecX b_in;
  VecX lb;
  VecX ub;

  int n() const { return static_cast<int>(c.size()); }
  /// Builds an n-variable problem with no constraints and infinite bounds.
  static QPProblem unconstrained(const MatX& Q, const VecX& c);
  /// Throws SpecError on inconsistent dimensions, asymmetric Q or lb > ub.
  void validate() const;
  double objective(const VecX& x) const { return 0.5 * x.dot(Q * x) + c.dot(x); }
};

enum class QPStatus { kOptimal, kInfeasible, kMaxIter };

const char* to_string(QPStatus s);

struct QPSolution {
  VecX x;
  QPStatus status = QPStatus::kMaxIter;
  int iterations = 0;
  int active_constraints = 0;  // inequality + bound constraints active at x
  double primal_residual = 0.0;  // max equality / inequality / bound violation
  double dual_residual = 0.0;    // stationarity |Qx + c - N u|_inf
  double min_multiplier = 0.0;   // most negative inequality multiplier (>= 0 when optimal)
};

/// Dual active-set method of Goldfarb and Idnani. Requires Q positive definite;
/// a PSD Q is regularised with a 1e-10 * trace ridge.
QPSolution solve_qp(const QPProblem& p, double tol = 1e-8, int max_iter = 200);

}  // namespace splatreach
