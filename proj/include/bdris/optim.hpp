#ifndef BDRIS_OPTIM_HPP
#define BDRIS_OPTIM_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "bdris/channels.hpp"
#include "bdris/sdp.hpp"
#include "bdris/symfit.hpp"
#include "bdris/topology.hpp"

namespace bdris {

// ---- objectives -----------------------------------------------------------

// p_t |g^H H w|^2
double receive_power(const CMatrix& h, const CVector& w, const CVector& g, double p_t);
// Sum over users (rows of h) of log(1 + SINR_k), natural log; column k of w serves user k.
double sum_rate(const CMatrix& h, const CMatrix& w, double sigma2);
// Largest squared singular value: receive power of the best unit-norm w and g.
double spectral_gain(const CMatrix& h);
// 100 * achieved / reference.
double relative_performance(double achieved, double reference);
// Receive-power metric of two susceptance solutions, both evaluated on the true model.
double relative_performance(const CompactDecomposition& decomp_true, const RMatrix& b_model,
                            const RMatrix& b_reference);

// ---- RIS state recovery ---------------------------------------------------

struct CayleyFit {
  RisState ris;
  double residual = 0.0;  // ||theta_bar a - b||_F / ||b||_F
  bool rank_deficient = false;
};

// Fit B_I on the topology so that theta_bar * a ~ b column by column. The linear system
// Bbar [Re(a+b), Im(a+b)] = [Re(-i y0 (a-b)), Im(-i y0 (a-b))] is solved in B_I
// coordinates; free directions are resolved towards Bbar = 0.
CayleyFit fit_cayley_map(const CompactDecomposition& decomp, const CMatrix& a, const CMatrix& b,
                         const Topology& topology);

struct RecoveryOptions {
  double residual_tol = 1e-7;  // relative
  double norm_tol = 1e-8;      // | ||u|| - ||hbar_it w|| | / ||u||
};

// B_I with theta_bar * hbar_it * w = u. Throws RecoveryError when the norms differ, the
// symmetric solvability condition fails, or the final residual exceeds the tolerance.
RisState recover_ris_state(const CVector& u_star, const CVector& w_star, const CompactDecomposition& decomp,
                           const Topology& topology, const RecoveryOptions& opts = {});

// ---- SISO -----------------------------------------------------------------

struct SisoSolution {
  RisState ris;
  double gain = 0.0;         // |H|^2 achieved by ris
  double upper_bound = 0.0;  // (|h_rt| + ||h_ri|| ||h_it||)^2
  double recovery_residual = 0.0;
};

SisoSolution optimize_siso(const CompactDecomposition& decomp, const Topology& topology,
                           const RecoveryOptions& opts = {});

// ---- single-stream MIMO ---------------------------------------------------

struct MimoOptions {
  SdpOptions sdp;
  RankOneOptions rank_one;
  RecoveryOptions recovery;
};

struct MimoSolution {
  CVector w;
  CVector g;
  RisState ris;
  double receive_power = 0.0;  // W
  double certificate = 0.0;    // SDP upper bound, W
  double eigen_ratio = 0.0;    // lambda_2 / lambda_1 of the SDP solution
  double recovery_residual = 0.0;
  int sdp_iterations = 0;
  bool bandwidth_sufficient = true;  // topology bandwidth >= optimal_bandwidth
};

MimoSolution optimize_mimo_single_stream(const CompactDecomposition& decomp, const Topology& topology,
                                         double p_t, const MimoOptions& opts = {});

// ---- multiuser MISO -------------------------------------------------------

struct AdmmOptions {
  double rho = 1.0;
  double xi = 0.1;
  // Penalty growth: rho *= rho_growth (up to rho_max) whenever the relative residual fails
  // to drop below stall_ratio times its previous value. xi is scaled with rho.
  double rho_growth = 1.1;
  double rho_max = 1e4;
  double stall_ratio = 0.9;
  int max_iters = 500;
  int min_iters = 20;        // no convergence test before this many iterations
  double tol_primal = 1e-5;  // relative to ||hbar_ri||_F
  double tol_obj = 1e-6;     // relative sum-rate change between iterations
  int fp_inner_iters = 1;
  int polish_iters = 50;     // precoder-only refinement on the returned channel
  std::uint64_t seed = 1;    // initial precoder draw
  bool rate_in_bits = false;
  // Starting susceptance (n_i x n_i, on the mask); zero when unset.
  std::optional<RMatrix> initial_b;

  void validate() const;
};

struct AdmmTraceEntry {
  double augmented_lagrangian = 0.0;
  double primal_residual = 0.0;  // relative
  double sum_rate = 0.0;         // of the current iterate on the true channel
};

struct MultiuserSolution {
  CMatrix w;  // n_t x n_r, ||w||_F^2 <= p_t
  RisState ris;
  // Auxiliary channel at the returned iterate; approximates (hbar_ri theta_bar)^H once converged.
  CMatrix u;
  double sum_rate = 0.0;
  double initial_sum_rate = 0.0;
  std::vector<AdmmTraceEntry> trace;
  int iterations = 0;
  bool converged = false;
};

MultiuserSolution optimize_multiuser_admm(const CompactDecomposition& decomp, const Topology& topology,
                                          double p_t, double sigma2, const AdmmOptions& opts = {});

// Fractional-programming precoder refinement for a fixed channel; never decreases the sum rate.
CMatrix refine_precoders(const CMatrix& h, const CMatrix& w_init, double p_t, double sigma2, int iterations);

}  // namespace bdris

#endif  // BDRIS_OPTIM_HPP
