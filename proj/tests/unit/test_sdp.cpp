#include <gtest/gtest.h>

#include "bdris/sdp.hpp"
#include "test_support.hpp"

namespace bdris {
namespace {


CompactDecomposition random_decomposition(int n_t, int n_i, int n_r, std::mt19937_64& rng) {
  const RandomNetwork net = random_passive_network(PortLayout(n_t, n_i, n_r), 50.0, rng);
  return compact_decompose(net.params, net.term);
}

double min_eig(const CMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(0.5 * (m + m.adjoint())).eigenvalues().minCoeff();
}

double tr(const CMatrix& a, const CMatrix& b) { return (a * b).trace().real(); }

TEST(Sdp, KktConditionsHold) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = random_decomposition(2, 5, 3, rng);
    const BeamformingSdp b = build_sdp_full(d);
    const SdpSolution s = solve_sdp(b.program);
    const auto& p = b.program;
    EXPECT_NEAR(tr(p.q1, s.x), 0.0, 1e-8);
    EXPECT_NEAR(tr(p.q2, s.x), 1.0, 1e-8);
    EXPECT_GT(min_eig(s.x), -1e-9);
    EXPECT_GT(min_eig(s.z), -1e-9);
    EXPECT_LT((s.z - (s.y1 * p.q1 + s.y2 * p.q2 - p.q0)).norm(), 1e-7);
    EXPECT_NEAR(tr(s.x, s.z), 0.0, 1e-8);
    EXPECT_LT(s.relative_gap, 1e-9);
    EXPECT_NEAR(s.value, s.dual_value, 1e-8 * std::abs(s.value));
  }
}

TEST(Sdp, ScalarChannelMatchesTriangleBound) {
  // With one antenna at each end the optimum is (|h_rt| + ||h_ri|| ||h_it||)^2.
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = random_decomposition(1, 6, 1, rng);
    const double bound = std::pow(std::abs(d.hbar_rt(0, 0)) + d.hbar_ri.norm() * d.hbar_it.norm(), 2);
    for (const BeamformingSdp& b : {build_sdp_full(d), build_sdp_reduced(d)}) {
      const SdpSolution s = solve_sdp(b.program);
      EXPECT_NEAR(b.objective_scale * s.value, bound, 1e-8 * bound);
    }
  }
}

TEST(Sdp, SingleElementPhaseGrid) {
  // n_t = n_i = n_r = 1: u = |h_it| e^{i phi}, so the optimum is a one-dimensional search.
  std::mt19937_64 rng(33);
  const auto d = random_decomposition(1, 1, 1, rng);
  double best = 0.0;
  const int grid = 100000;
  for (int k = 0; k < grid; ++k) {
    const cplx u = std::abs(d.hbar_it(0, 0)) * std::exp(kI * (2.0 * kPi * k / grid));
    best = std::max(best, std::norm(d.hbar_rt(0, 0) + d.hbar_ri(0, 0) * u));
  }
  const BeamformingSdp b = build_sdp_full(d);
  const double v = b.objective_scale * solve_sdp(b.program).value;
  EXPECT_GE(v, best * (1.0 - 1e-9));
  EXPECT_LE(v, best * (1.0 + 1e-8));
}

TEST(Sdp, FullAndReducedAgreeAndDominateSamples) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = random_decomposition(3, 8, 2, rng);
    const BeamformingSdp full = build_sdp_full(d);
    const BeamformingSdp red = build_sdp_reduced(d);
    EXPECT_EQ(red.program.dim(), 3 + 2);
    const double vf = full.objective_scale * solve_sdp(full.program).value;
    const double vr = red.objective_scale * solve_sdp(red.program).value;
    EXPECT_NEAR(vf, vr, 1e-7 * vf);
    // Random feasible points never exceed the optimum.
    for (int k = 0; k < 2000; ++k) {
      const CVector w = testing::random_unit(3, rng);
      const CVector u = testing::random_unit(8, rng) * (d.hbar_it * w).norm();
      const double p = (d.hbar_rt * w + d.hbar_ri * u).squaredNorm();
      EXPECT_LE(p, vf * (1.0 + 1e-9));
    }
  }
}

TEST(Sdp, RankOneExtractionPreservesConstraints) {
  std::mt19937_64 rng(35);
  const auto d = random_decomposition(2, 4, 2, rng);
  const BeamformingSdp b = build_sdp_full(d);
  const auto& p = b.program;
  // Rank-three feasible X from three feasible vectors with ||w||^2 = 1/3 each.
  CMatrix x = CMatrix::Zero(p.dim(), p.dim());
  const CMatrix hit = d.hbar_it / b.u_scale;
  for (int k = 0; k < 3; ++k) {
    CVector v(p.dim());
    const CVector w = testing::random_unit(2, rng) / std::sqrt(3.0);
    v.head(2) = w;
    v.tail(4) = testing::random_unit(4, rng) * (hit * w).norm();
    x += v * v.adjoint();
  }
  ASSERT_GT(eigen_ratio(x), 1e-3);
  const CVector v = rank_one_extract(p, x);
  const CMatrix vv = v * v.adjoint();
  EXPECT_NEAR(tr(p.q0, vv), tr(p.q0, x), 1e-10 * std::abs(tr(p.q0, x)));
  EXPECT_NEAR(tr(p.q1, vv), 0.0, 1e-10);
  EXPECT_NEAR(tr(p.q2, vv), 1.0, 1e-10);
  EXPECT_NEAR(eigen_ratio(vv), 0.0, 1e-12);
}

TEST(Sdp, SolutionIsRankOne) {
  std::mt19937_64 rng(36);
  const auto d = random_decomposition(2, 6, 2, rng);
  const BeamformingSdp b = build_sdp_reduced(d);
  const SdpSolution s = solve_sdp(b.program);
  EXPECT_LT(eigen_ratio(s.x), 1e-6);
  const CVector v = rank_one_extract(b.program, s.x);
  EXPECT_NEAR(tr(b.program.q0, v * v.adjoint()), s.value, 1e-7 * s.value);
}

TEST(Sdp, Validation) {
  TwoConstraintSdp p;
  p.q0 = CMatrix::Identity(2, 2);
  p.q1 = CMatrix::Zero(2, 2);
  p.q2 = CMatrix::Zero(2, 2);
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.q2 = CMatrix::Identity(2, 2);
  p.q1(0, 1) = cplx(0, 1);
  EXPECT_THROW(p.validate(), InvalidArgument);
}

}  // namespace
}  // namespace bdris
