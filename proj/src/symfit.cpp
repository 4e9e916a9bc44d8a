#include "bdris/symfit.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace bdris {

namespace {

std::vector<std::pair<int, int>> free_pairs(const Topology& t) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < t.n_i(); ++i) {
    for (int j = i; j < t.n_i(); ++j) {
      if (t.allows(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

void validate(const SymFitProblem& p) {
  const int n = p.topology.n_i();
  if (p.l_factor.rows() != n || p.l_factor.cols() != n) throw InvalidArgument("L must be n_i x n_i");
  if (!(p.rho >= 0.0) || !(p.xi >= 0.0) || !(p.rho > 0.0 || p.xi > 0.0)) {
    throw InvalidArgument("rho and xi must be non-negative and not both zero");
  }
  if (p.rho > 0.0) {
    if (p.r_factor.rows() != n || p.gamma1.rows() != n || p.gamma1.cols() != p.r_factor.cols()) {
      throw InvalidArgument("R and gamma1 must be n_i x m");
    }
  }
  if (p.xi > 0.0 && (p.gamma2.rows() != n || p.gamma2.cols() != n)) {
    throw InvalidArgument("gamma2 must be n_i x n_i");
  }
  if (p.reference && (p.reference->rows() != n || p.reference->cols() != n)) {
    throw InvalidArgument("reference must be n_i x n_i");
  }
}

// xi = 0: the data matrix is small (n_i m rows), so form it and take the
// minimum-norm least-squares step from the reference.
SymFitResult solve_direct(const SymFitProblem& p, const std::vector<std::pair<int, int>>& vars) {
  const int n = p.topology.n_i();
  const int m = static_cast<int>(p.r_factor.cols());
  const int nv = static_cast<int>(vars.size());
  RMatrix a(n * m, nv);
  for (int k = 0; k < nv; ++k) {
    const auto [i, j] = vars[k];
    RMatrix col = p.l_factor.col(i) * p.r_factor.row(j);
    if (i != j) col += p.l_factor.col(j) * p.r_factor.row(i);
    a.col(k) = Eigen::Map<const RVector>(col.data(), n * m);
  }
  RVector rhs = Eigen::Map<const RVector>(p.gamma1.data(), n * m);
  RVector x0 = RVector::Zero(nv);
  if (p.reference) {
    const RMatrix ref = 0.5 * (*p.reference + p.reference->transpose());
    for (int k = 0; k < nv; ++k) x0(k) = ref(vars[k].first, vars[k].second);
    rhs -= a * x0;
  }
  Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(a);
  SymFitResult res;
  res.rank = static_cast<int>(cod.rank());
  res.rank_deficient = res.rank < nv;
  res.b = unpack_free_variables(x0 + cod.solve(rhs), p.topology);
  return res;
}

// Normal equations assembled from Gram matrices, without forming the data matrices.
SymFitResult solve_normal(const SymFitProblem& p, const std::vector<std::pair<int, int>>& vars) {
  const int nv = static_cast<int>(vars.size());
  const RMatrix& l = p.l_factor;
  const RMatrix g = l.transpose() * l;
  const RMatrix h = l * l.transpose();  // equals g unless L is non-symmetric
  RMatrix pr = RMatrix::Zero(g.rows(), g.cols());
  RMatrix f = RMatrix::Zero(g.rows(), g.cols());
  if (p.rho > 0.0) {
    pr = p.r_factor * p.r_factor.transpose();
    f += p.rho * l.transpose() * p.gamma1 * p.r_factor.transpose();
  }
  if (p.xi > 0.0) f += p.xi * l.transpose() * p.gamma2 * l.transpose();

  RMatrix nmat(nv, nv);
  RVector rhs(nv);
  for (int k = 0; k < nv; ++k) {
    const auto [a, b] = vars[k];
    const double sk = a == b ? 0.5 : 1.0;
    rhs(k) = sk * (f(b, a) + f(a, b));
    for (int q = k; q < nv; ++q) {
      const auto [c, d] = vars[q];
      const double s = sk * (c == d ? 0.5 : 1.0);
      double v = 0.0;
      if (p.rho > 0.0) {
        v += p.rho * (g(b, c) * pr(d, a) + g(b, d) * pr(c, a) + g(a, c) * pr(d, b) + g(a, d) * pr(c, b));
      }
      if (p.xi > 0.0) {
        v += p.xi * (g(b, c) * h(d, a) + g(b, d) * h(c, a) + g(a, c) * h(d, b) + g(a, d) * h(c, b));
      }
      nmat(k, q) = nmat(q, k) = s * v;
    }
  }

  SymFitResult res;
  res.rank = nv;
  Eigen::LLT<RMatrix> llt(nmat);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
    const double ridge = 1e-12 * std::max(nmat.trace() / nv, 1e-300);
    nmat.diagonal().array() += ridge;
    llt.compute(nmat);
    res.regularized = true;
    if (llt.info() != Eigen::Success) throw SingularMatrixError("symfit normal equations", 1.0 / 1e-12);
  }
  res.b = unpack_free_variables(llt.solve(rhs), p.topology);
  return res;
}

// Fully connected, xi > 0, symmetric L: in S = L B L the stationarity condition is the
// Lyapunov equation rho/2 (S P + P S) + xi S = sym(rho gamma1 K^T + xi gamma2), K = L^{-1} R.
SymFitResult solve_lyapunov(const SymFitProblem& p) {
  const int n = p.topology.n_i();
  const auto l_lu = p.l_factor.partialPivLu();
  RMatrix pk = RMatrix::Zero(n, n);
  RMatrix rhs = p.xi * p.gamma2;
  if (p.rho > 0.0) {
    const RMatrix k = l_lu.solve(p.r_factor);
    pk = k * k.transpose();
    rhs += p.rho * p.gamma1 * k.transpose();
  }
  rhs = (0.5 * (rhs + rhs.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (pk + pk.transpose()));
  const RMatrix& v = es.eigenvectors();
  const RVector& lam = es.eigenvalues();
  RMatrix s = v.transpose() * rhs * v;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s(i, j) /= 0.5 * p.rho * (lam(i) + lam(j)) + p.xi;
  }
  s = v * s * v.transpose();
  RMatrix b = l_lu.solve(l_lu.solve(s).transpose());
  SymFitResult res;
  res.rank = n * (n + 1) / 2;
  res.b = 0.5 * (b + b.transpose());
  return res;
}

}  // namespace

RVector pack_free_variables(const RMatrix& b, const Topology& topology) {
  const int n = topology.n_i();
  if (b.rows() != n || b.cols() != n) throw InvalidArgument("matrix must be n_i x n_i");
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  std::vector<double> values;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (std::abs(b(i, j) - b(j, i)) > 1e-12 * scale) throw InvalidArgument("matrix is not symmetric");
      if (topology.allows(i, j)) {
        values.push_back(b(i, j));
      } else if (b(i, j) != 0.0) {
        throw InvalidArgument("matrix has entries outside the topology mask");
      }
    }
  }
  return Eigen::Map<RVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

RMatrix unpack_free_variables(const RVector& x, const Topology& topology) {
  const int n = topology.n_i();
  RMatrix b = RMatrix::Zero(n, n);
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (!topology.allows(i, j)) continue;
      if (k >= x.size()) throw InvalidArgument("too few free variables for the mask");
      b(i, j) = b(j, i) = x(k++);
    }
  }
  if (k != x.size()) throw InvalidArgument("too many free variables for the mask");
  return b;
}

double symfit_objective(const SymFitProblem& p, const RMatrix& b) {
  double v = 0.0;
  if (p.rho > 0.0) v += 0.5 * p.rho * (p.l_factor * b * p.r_factor - p.gamma1).squaredNorm();
  if (p.xi > 0.0) v += 0.5 * p.xi * (p.l_factor * b * p.l_factor - p.gamma2).squaredNorm();
  return v;
}

SymFitResult solve_symfit(const SymFitProblem& problem) {
  validate(problem);
  const auto vars = free_pairs(problem.topology);
  SymFitResult res;
  const bool l_symmetric =
      (problem.l_factor - problem.l_factor.transpose()).cwiseAbs().maxCoeff() <=
      1e-14 * std::max(1.0, problem.l_factor.cwiseAbs().maxCoeff());
  if (problem.xi == 0.0) {
    res = solve_direct(problem, vars);
  } else if (problem.topology.kind() == TopologyKind::kFully && l_symmetric) {
    res = solve_lyapunov(problem);
  } else {
    res = solve_normal(problem, vars);
  }
  res.free_variables = static_cast<int>(vars.size());
  res.objective = symfit_objective(problem, res.b);
  return res;
}

}  // namespace bdris
