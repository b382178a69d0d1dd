#include "splatreach/qp.hpp"

#include <limits>
#include <vector>

namespace splatreach {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraints normalised to n^T x >= b (equalities: n^T x = b).
struct ConstraintSet {
  MatX normals;  // n x m, columns
  VecX rhs;
  int n_eq = 0;
};

ConstraintSet gather(const QPProblem& p) {
  const int n = p.n();
  std::vector<std::pair<VecX, double>> cols;
  ConstraintSet cs;
  for (int i = 0; i < p.A_eq.rows(); ++i) cols.emplace_back(p.A_eq.row(i).transpose(), p.b_eq[i]);
  cs.n_eq = static_cast<int>(cols.size());
  for (int i = 0; i < p.A_in.rows(); ++i) cols.emplace_back(-p.A_in.row(i).transpose(), -p.b_in[i]);
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(p.lb[i])) cols.emplace_back(VecX::Unit(n, i), p.lb[i]);
    if (std::isfinite(p.ub[i])) cols.emplace_back(-VecX::Unit(n, i), -p.ub[i]);
  }
  cs.normals.resize(n, static_cast<Eigen::Index>(cols.size()));
  cs.rhs.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    cs.normals.col(static_cast<Eigen::Index>(k)) = cols[k].first;
    cs.rhs[static_cast<Eigen::Index>(k)] = cols[k].second;
  }
  return cs;
}

}  // namespace

QPProblem QPProblem::unconstrained(const MatX& Q, const VecX& c) {
  QPProblem p;
  const auto n = c.size();
  p.Q = Q;
  p.c = c;
  p.A_eq.resize(0, n);
  p.A_in.resize(0, n);
  p.b_eq.resize(0);
  p.b_in.resize(0);
  p.lb = VecX::Constant(n, -kInf);
  p.ub = VecX::Constant(n, kInf);
  return p;
}

void QPProblem::validate() const {
  const auto n = c.size();
  if (Q.rows() != n || Q.cols() != n) throw SpecError("QP: Q must be n x n");
  if (A_eq.cols() != n || A_eq.rows() != b_eq.size()) throw SpecError("QP: A_eq/b_eq mismatch");
  if (A_in.cols() != n || A_in.rows() != b_in.size()) throw SpecError("QP: A_in/b_in mismatch");
  if (lb.size() != n || ub.size() != n) throw SpecError("QP: bounds must have n entries");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
    throw SpecError("QP: Q must be symmetric");
  if ((lb.array() > ub.array()).any()) throw SpecError("QP: lb > ub");
}

const char* to_string(QPStatus s) {
  switch (s) {
    case QPStatus::kOptimal: return "optimal";
    case QPStatus::kInfeasible: return "infeasible";
    case QPStatus::kMaxIter: return "max_iter";
  }
  return "unknown";
}

QPSolution solve_qp(const QPProblem& p, double tol, int max_iter) {
  p.validate();
  const int n = p.n();
  const ConstraintSet cs = gather(p);
  const int m = static_cast<int>(cs.rhs.size());

  MatX Q = p.Q;
  Eigen::LLT<MatX> llt(Q);
  if (llt.info() != Eigen::Success) {
    Q.diagonal().array() += 1e-10 * std::max(1.0, Q.trace());
    llt.compute(Q);
  }
  // L^{-1}; J = L^{-T} Qr spans the metric-orthogonal complement of the active normals.
  const MatX L_inv = llt.matrixL().solve(MatX::Identity(n, n));

  QPSolution sol;
  VecX x = -llt.solve(p.c);

  std::vector<int> active;  // constraint ids, equalities first
  VecX u(0);                // multipliers aligned with `active`

  VecX z(n), r;
  auto directions = [&](const VecX& np) {
    const int q = static_cast<int>(active.size());
    if (q == 0) {
      z = L_inv.transpose() * (L_inv * np);
      r.resize(0);
      return;
    }
    MatX B(n, q);
    for (int k = 0; k < q; ++k) B.col(k) = L_inv * cs.normals.col(active[k]);
    Eigen::HouseholderQR<MatX> qr(B);
    const MatX Qr = qr.householderQ() * MatX::Identity(n, n);
    const MatX R = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    const MatX J = L_inv.transpose() * Qr;
    const VecX d = J.transpose() * np;
    z = J.rightCols(n - q) * d.tail(n - q);
    r = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
  };
  auto scale_of = [&](const VecX& np) { return (L_inv * np).squaredNorm(); };

  int iter = 0;
  // Equality constraints: always active, multipliers unrestricted.
  for (int e = 0; e < cs.n_eq; ++e) {
    const VecX np = cs.normals.col(e);
    const double s = np.dot(x) - cs.rhs[e];
    directions(np);
    const double zn = z.dot(np);
    if (zn <= 1e-12 * scale_of(np)) {
      if (std::abs(s) <= tol * (1.0 + std::abs(cs.rhs[e]))) continue;  // redundant
      sol.status = QPStatus::kInfeasible;
      sol.x = x;
      return sol;
    }
    const double t = -s / zn;
    x += t * z;
    if (r.size() > 0) u -= t * r;
    u.conservativeResize(u.size() + 1);
    u[u.size() - 1] = t;
    active.push_back(e);
    ++iter;
  }
  const int n_eq_active = static_cast<int>(active.size());

  const double add_tol = std::max(1e-13, 1e-3 * tol);
  std::vector<char> is_active(m, 0);
  for (int a : active) is_active[a] = 1;

  sol.status = QPStatus::kMaxIter;
  while (iter < max_iter) {
    // Most violated inequality.
    int pidx = -1;
    double worst = -add_tol;
    for (int k = cs.n_eq; k < m; ++k) {
      if (is_active[k]) continue;
      const double nrm = cs.normals.col(k).norm();
      const double s = (cs.normals.col(k).dot(x) - cs.rhs[k]) / std::max(nrm, 1e-300);
      if (s < worst) {
        worst = s;
        pidx = k;
      }
    }
    if (pidx < 0) {
      sol.status = QPStatus::kOptimal;
      break;
    }
    const VecX np = cs.normals.col(pidx);
    double u_new = 0.0;
    bool infeasible = false;
    for (;;) {
      if (++iter > max_iter) break;
      directions(np);
      const double s = np.dot(x) - cs.rhs[pidx];
      // Largest dual step keeping active inequality multipliers non-negative.
      double t1 = kInf;
      int drop = -1;
      for (int k = n_eq_active; k < static_cast<int>(active.size()); ++k) {
        if (r[k] > 1e-12 * (1.0 + r.cwiseAbs().maxCoeff())) {
          const double ratio = u[k] / r[k];
          if (ratio < t1) {
            t1 = ratio;
            drop = k;
          }
        }
      }
      const double zn = z.dot(np);
      const double t2 = zn > 1e-12 * scale_of(np) ? -s / zn : kInf;
      if (!std::isfinite(t1) && !std::isfinite(t2)) {
        infeasible = true;
        break;
      }
      const double t = std::min(t1, t2);
      if (std::isfinite(t2)) x += t * z;
      if (r.size() > 0) u -= t * r;
      u_new += t;
      if (t2 <= t1) {
        active.push_back(pidx);
        is_active[pidx] = 1;
        u.conservativeResize(u.size() + 1);
        u[u.size() - 1] = u_new;
        break;
      }
      is_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      VecX u2(u.size() - 1);
      u2 << u.head(drop), u.tail(u.size() - drop - 1);
      u = u2;
    }
    if (infeasible) {
      sol.status = QPStatus::kInfeasible;
      break;
    }
  }

  sol.x = x;
  sol.iterations = iter;
  sol.active_constraints = static_cast<int>(active.size()) - n_eq_active;

  // KKT residuals.
  VecX grad = Q * x + p.c;
  for (std::size_t k = 0; k < active.size(); ++k) grad -= u[k] * cs.normals.col(active[k]);
  // Measured against the caller's Q (the ridge, if any, is not part of the contract).
  grad += (p.Q - Q) * x;
  sol.dual_residual = grad.cwiseAbs().maxCoeff();
  double viol = 0.0;
  for (int k = 0; k < m; ++k) {
    const double s = cs.normals.col(k).dot(x) - cs.rhs[k];
    viol = std::max(viol, k < cs.n_eq ? std::abs(s) : -s);
  }
  sol.primal_residual = viol;
  sol.min_multiplier = 0.0;
  for (int k = n_eq_active; k < static_cast<int>(active.size()); ++k)
    sol.min_multiplier = std::min(sol.min_multiplier, u[k]);
  if (n == 0) sol.dual_residual = 0.0;
  return sol;
}

}  // namespace splatreach
