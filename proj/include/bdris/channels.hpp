#ifndef BDRIS_CHANNELS_HPP
#define BDRIS_CHANNELS_HPP

#include <cmath>
#include <string>
#include <utility>

#include "bdris/netparams.hpp"

namespace bdris {

// Channel as an affine function of a virtual unitary matrix:
//   H = hbar_rt + hbar_ri * theta_bar * hbar_it.
struct CompactDecomposition {
  CMatrix hbar_rt;      // n_r x n_t
  CMatrix hbar_ri;      // n_r x n_i
  CMatrix hbar_it;      // n_i x n_t
  RMatrix re_ybar_ii;   // real part of the loaded RIS admittance, PD
  RMatrix im_ybar_ii;
  RMatrix sqrt_re;      // re_ybar_ii^{1/2}
  RMatrix inv_sqrt_re;  // re_ybar_ii^{-1/2}
  double y0 = 0.02;

  int n_t() const { return static_cast<int>(hbar_it.cols()); }
  int n_i() const { return static_cast<int>(hbar_it.rows()); }
  int n_r() const { return static_cast<int>(hbar_rt.rows()); }

  // sqrt(y0) * inv_sqrt_re, the congruence factor taking B_I to Bbar_I.
  RMatrix l_factor() const { return std::sqrt(y0) * inv_sqrt_re; }
};

struct RisState {
  RMatrix b_i;         // susceptance (S)
  RMatrix bbar_i;      // transformed susceptance
  CMatrix theta_bar;   // Cayley transform of bbar_i
};

struct DecomposeOptions {
  double eigen_floor = 1e-14;  // relative to the largest eigenvalue
  InversionOptions inversion;
};

CompactDecomposition compact_decompose(const NetworkParameters& params, const Terminations& term,
                                       const DecomposeOptions& opts = {});

// Bbar = y0 Re^{-1/2} (B + Im) Re^{-1/2} and its inverse.
RMatrix b_to_bbar(const CompactDecomposition& decomp, const RMatrix& b_i);
RMatrix bbar_to_b(const CompactDecomposition& decomp, const RMatrix& bbar_i);

// (y0 I + i bbar)^{-1} (y0 I - i bbar).
CMatrix cayley_transform(const RMatrix& bbar, double y0);

RisState make_ris_state(const CompactDecomposition& decomp, const RMatrix& b_i);
RisState make_ris_state_from_bbar(const CompactDecomposition& decomp, const RMatrix& bbar_i);

// Full multiport model, admittance form; B_I may be singular.
CMatrix channel_exact(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i);
// Block-eliminated form of the same model.
CMatrix channel_explicit(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i);
CMatrix channel_compact(const CompactDecomposition& decomp, const RisState& state);
CMatrix channel_compact(const CompactDecomposition& decomp, const CMatrix& theta_bar);

// Unilateral approximation: feedback from receiver to RIS to transmitter ignored.
CMatrix channel_app1(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i);
// Additionally matched, uncoupled transmit and receive arrays.
CMatrix channel_app2(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i);
// Additionally no coupling between RIS elements (Z_II = z0 I).
CMatrix channel_app3(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i);

enum class ChannelModel { kExact, kApp1, kApp2, kApp3 };

std::string to_string(ChannelModel model);
ChannelModel parse_channel_model(const std::string& name);

CMatrix channel(ChannelModel model, const NetworkParameters& params, const Terminations& term,
                const RMatrix& b_i);

// Parameters (and terminations) on which the exact model coincides with `model`:
// app1 zeroes Z_TI, Z_TR, Z_IR; app2 also sets Z_TT = Z_RR = z0 I with matched
// terminations; app3 also sets Z_II = z0 I. The result is generally non-reciprocal.
std::pair<NetworkParameters, Terminations> model_inputs(const NetworkParameters& params,
                                                         const Terminations& term, ChannelModel model);

}  // namespace bdris

#endif  // BDRIS_CHANNELS_HPP
