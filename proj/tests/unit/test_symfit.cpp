#include <gtest/gtest.h>

#include "bdris/symfit.hpp"
#include "test_support.hpp"

namespace bdris {
namespace {

using testing::random_masked;

RMatrix gaussian(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  RMatrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = n(rng);
  return m;
}

// Least squares over the free entries, assembled column by column from basis matrices.
double brute_force_minimum(const SymFitProblem& p, RMatrix* argmin = nullptr) {
  const int n = p.topology.n_i();
  std::vector<std::pair<int, int>> vars;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (p.topology.allows(i, j)) vars.emplace_back(i, j);
    }
  }
  const Eigen::Index m1 = p.gamma1.size();
  const Eigen::Index m2 = p.xi > 0.0 ? p.gamma2.size() : 0;
  RMatrix a(m1 + m2, vars.size());
  RVector rhs(m1 + m2);
  for (size_t k = 0; k < vars.size(); ++k) {
    RMatrix e = RMatrix::Zero(n, n);
    e(vars[k].first, vars[k].second) = 1.0;
    e(vars[k].second, vars[k].first) = 1.0;
    const RMatrix c1 = std::sqrt(p.rho) * p.l_factor * e * p.r_factor;
    a.col(k).head(m1) = Eigen::Map<const RVector>(c1.data(), m1);
    if (m2 > 0) {
      const RMatrix c2 = std::sqrt(p.xi) * p.l_factor * e * p.l_factor;
      a.col(k).tail(m2) = Eigen::Map<const RVector>(c2.data(), m2);
    }
  }
  rhs.head(m1) = std::sqrt(p.rho) * Eigen::Map<const RVector>(p.gamma1.data(), m1);
  if (m2 > 0) rhs.tail(m2) = std::sqrt(p.xi) * Eigen::Map<const RVector>(p.gamma2.data(), m2);
  const RVector x = a.completeOrthogonalDecomposition().solve(rhs);
  RMatrix b = RMatrix::Zero(n, n);
  for (size_t k = 0; k < vars.size(); ++k) {
    b(vars[k].first, vars[k].second) = x(k);
    b(vars[k].second, vars[k].first) = x(k);
  }
  if (argmin) *argmin = b;
  return 0.5 * (a * x - rhs).squaredNorm();
}

SymFitProblem random_problem(const Topology& t, int m, double xi, std::mt19937_64& rng) {
  const int n = t.n_i();
  SymFitProblem p;
  const RMatrix s = gaussian(n, n, rng);
  p.l_factor = s * s.transpose() + n * RMatrix::Identity(n, n);  // symmetric PD, like Re^{-1/2}
  p.r_factor = gaussian(n, m, rng);
  p.gamma1 = gaussian(n, m, rng);
  p.gamma2 = gaussian(n, n, rng);
  p.rho = 1.7;
  p.xi = xi;
  p.topology = t;
  return p;
}

TEST(SymFit, MatchesBruteForceAcrossTopologiesAndPaths) {
  std::mt19937_64 rng(21);
  const int n = 6;
  for (const auto& t : {Topology::single(n), Topology::group(n, 2), Topology::band(n, 2), Topology::fully(n)}) {
    for (double xi : {0.0, 0.3}) {
      for (int m : {2, 8}) {
        const SymFitProblem p = random_problem(t, m, xi, rng);
        RMatrix oracle_b;
        const double oracle = brute_force_minimum(p, &oracle_b);
        const SymFitResult r = solve_symfit(p);
        EXPECT_NEAR(r.objective, oracle, 1e-9 * std::max(1.0, oracle)) << t.name() << " xi=" << xi << " m=" << m;
        EXPECT_NEAR(symfit_objective(p, r.b), r.objective, 1e-12 * std::max(1.0, oracle));
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            if (!t.allows(i, j)) EXPECT_EQ(r.b(i, j), 0.0);
          }
        }
        EXPECT_LT((r.b - r.b.transpose()).norm(), 1e-12 * std::max(1.0, r.b.norm()));
        // Unique minimizer when xi > 0 (L is nonsingular) or the data matrix has full column rank.
        if (xi > 0.0 || m * n >= t.admittance_count() * 2) {
          EXPECT_LT((r.b - oracle_b).norm(), 1e-7 * std::max(1.0, oracle_b.norm())) << t.name();
        }
      }
    }
  }
}

TEST(SymFit, GeneralLeftFactorUsesNormalEquations) {
  std::mt19937_64 rng(22);
  SymFitProblem p = random_problem(Topology::fully(5), 3, 0.5, rng);
  p.l_factor = gaussian(5, 5, rng) + 5.0 * RMatrix::Identity(5, 5);  // not symmetric
  EXPECT_NEAR(solve_symfit(p).objective, brute_force_minimum(p), 1e-9 * std::max(1.0, brute_force_minimum(p)));
}

TEST(SymFit, ExactDataIsRecovered) {
  std::mt19937_64 rng(23);
  const Topology t = Topology::band(7, 1);
  SymFitProblem p = random_problem(t, 4, 0.0, rng);
  const RMatrix truth = random_masked(t, 1.0, rng);
  p.gamma1 = p.l_factor * truth * p.r_factor;
  const SymFitResult r = solve_symfit(p);
  EXPECT_LT((r.b - truth).norm(), 1e-9 * truth.norm());
  EXPECT_LT(r.objective, 1e-18);
}

TEST(SymFit, UnderdeterminedPicksNearestToReference) {
  // One data column on a fully-connected 4 x 4: 8 equations, 10 unknowns.
  std::mt19937_64 rng(24);
  SymFitProblem p = random_problem(Topology::fully(4), 1, 0.0, rng);
  const RMatrix truth = testing::random_symmetric(4, 1.0, rng);
  p.gamma1 = p.l_factor * truth * p.r_factor;
  const RMatrix ref = testing::random_symmetric(4, 1.0, rng);
  p.reference = ref;
  const SymFitResult r = solve_symfit(p);
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_LT(r.objective, 1e-18);
  // Any other exact solution lies farther from the reference: perturb along the null space.
  SymFitProblem q = p;
  q.reference.reset();
  const SymFitResult r0 = solve_symfit(q);
  EXPECT_LT(r0.objective, 1e-18);
  EXPECT_LE((r.b - ref).norm(), (r0.b - ref).norm() + 1e-12);
  EXPECT_LE((r.b - ref).norm(), (truth - ref).norm() + 1e-12);
}

TEST(SymFit, PackUnpackRoundTrip) {
  std::mt19937_64 rng(25);
  const Topology t = Topology::group(6, 3);
  const RMatrix b = random_masked(t, 1.0, rng);
  const RVector x = pack_free_variables(b, t);
  EXPECT_EQ(x.size(), t.admittance_count());
  EXPECT_EQ(unpack_free_variables(x, t), b);
  RMatrix outside = b;
  outside(0, 5) = outside(5, 0) = 1.0;
  EXPECT_THROW(pack_free_variables(outside, t), InvalidArgument);
  EXPECT_THROW(unpack_free_variables(RVector::Zero(3), t), InvalidArgument);
}

TEST(SymFit, RejectsBadShapes) {
  std::mt19937_64 rng(26);
  SymFitProblem p = random_problem(Topology::fully(3), 2, 0.0, rng);
  p.gamma1 = RMatrix::Zero(3, 3);
  EXPECT_THROW(solve_symfit(p), InvalidArgument);
  p = random_problem(Topology::fully(3), 2, 0.0, rng);
  p.rho = 0.0;
  EXPECT_THROW(solve_symfit(p), InvalidArgument);
}

}  // namespace
}  // namespace bdris
