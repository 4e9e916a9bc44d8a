#ifndef BDRIS_SDP_HPP
#define BDRIS_SDP_HPP

#include "bdris/channels.hpp"
#include "bdris/types.hpp"

namespace bdris {

// maximize tr(q0 X)  s.t.  tr(q1 X) = 0,  tr(q2 X) = 1,  X >= 0  (X Hermitian).
struct TwoConstraintSdp {
  CMatrix q0;
  CMatrix q1;
  CMatrix q2;

  int dim() const { return static_cast<int>(q0.rows()); }
  void validate() const;
};

// Program over x = [w; u] for single-stream beamforming, stored with normalized data:
// the true objective is objective_scale * tr(q0 X) and the true u is u_scale times the
// trailing block of x.
struct BeamformingSdp {
  TwoConstraintSdp program;
  int n_t = 0;
  double objective_scale = 1.0;
  double u_scale = 1.0;
  bool reduced = false;
  // Reduced program only: u = lift * ubar, with hbar_ri = left * diag(singular_values) * lift^H
  // restricted to the kept directions.
  CMatrix lift;
  CMatrix left;
  RVector singular_values;
};

// Variables (w, u), dimension n_t + n_i.
BeamformingSdp build_sdp_full(const CompactDecomposition& decomp);
// Variables (w, ubar) after rotating u onto the leading right-singular vectors of
// hbar_ri; dimension n_t + min(n_r, n_i).
BeamformingSdp build_sdp_reduced(const CompactDecomposition& decomp);

struct SdpOptions {
  double tol = 1e-9;
  int max_iterations = 200;
  double step_fraction = 0.98;
  double divergence_bound = 1e12;
};

struct SdpSolution {
  CMatrix x;                 // primal optimum
  CMatrix z;                 // dual slack y1 q1 + y2 q2 - q0 (PSD)
  double value = 0.0;        // tr(q0 X)
  double dual_value = 0.0;   // y2
  double y1 = 0.0;
  double y2 = 0.0;
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  int weak_duality_violations = 0;
};

// Real symmetric embedding solved by a primal-dual path-following interior-point
// method with Nesterov-Todd scaling and a Mehrotra-type centering rule.
SdpSolution solve_sdp(const TwoConstraintSdp& sdp, const SdpOptions& opts = {});

struct RankOneOptions {
  double ratio_tol = 1e-6;  // lambda_2 / lambda_1 accepted as rank one
  int max_reductions = 64;
};

// Returns x with X ~ x x^H. Higher-rank X is first reduced by rank-reduction steps that
// keep tr(q_k X) fixed for k = 0, 1, 2. The first nonzero entry of x is real positive.
CVector rank_one_extract(const TwoConstraintSdp& sdp, const CMatrix& x, const RankOneOptions& opts = {});

// Largest-to-second eigenvalue ratio lambda_2 / lambda_1 of a Hermitian PSD matrix.
double eigen_ratio(const CMatrix& x);

}  // namespace bdris

#endif  // BDRIS_SDP_HPP
