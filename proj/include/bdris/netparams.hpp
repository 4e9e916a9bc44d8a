#ifndef BDRIS_NETPARAMS_HPP
#define BDRIS_NETPARAMS_HPP

#include <cstdint>
#include <optional>
#include <random>

#include "bdris/types.hpp"

namespace bdris {

enum class PortGroup { kTransmit, kRis, kReceive };

// Port counts of the transmitter / RIS / receiver partition of the N-port channel.
class PortLayout {
public:
  PortLayout(int n_t, int n_i, int n_r);

  int n_t() const { return n_t_; }
  int n_i() const { return n_i_; }
  int n_r() const { return n_r_; }
  int total() const { return n_t_ + n_i_ + n_r_; }

  int offset(PortGroup g) const;
  int size(PortGroup g) const;

  friend bool operator==(const PortLayout&, const PortLayout&) = default;

private:
  int n_t_;
  int n_i_;
  int n_r_;
};

// Source/load impedances and the scalar reference impedance.
struct Terminations {
  CVector z_t;  // diagonal of Z_T
  CVector z_r;  // diagonal of Z_R
  double z0 = 50.0;

  double y0() const { return 1.0 / z0; }
  CVector y_t() const { return z_t.cwiseInverse(); }
  CVector y_r() const { return z_r.cwiseInverse(); }

  // Z_T = Z_R = z0 I.
  static Terminations matched(const PortLayout& layout, double z0);
};

// Impedance matrix of the (T, I, R) multiport with named block access.
class NetworkParameters {
public:
  NetworkParameters(PortLayout layout, CMatrix z);

  const PortLayout& layout() const { return layout_; }
  const CMatrix& z() const { return z_; }

  CMatrix block(PortGroup rows, PortGroup cols) const;
  void set_block(PortGroup rows, PortGroup cols, const CMatrix& value);

  // max |z - z^T| relative to max |z|.
  double reciprocity_error() const;
  bool is_reciprocal(double tol = 1e-12) const { return reciprocity_error() <= tol; }

private:
  PortLayout layout_;
  CMatrix z_;
};

struct InversionOptions {
  double condition_cap = 1e12;
};

// Y = Z^{-1}; throws SingularMatrixError when the condition estimate exceeds the cap.
CMatrix z_to_y(const CMatrix& z, const InversionOptions& opts = {});
inline CMatrix y_to_z(const CMatrix& y, const InversionOptions& opts = {}) { return z_to_y(y, opts); }

// S = (Z + z0 I)^{-1} (Z - z0 I).
CMatrix z_to_s(const CMatrix& z, double z0, const InversionOptions& opts = {});

// Sub-block of a full N x N matrix partitioned by `layout`.
CMatrix partition_block(const CMatrix& m, const PortLayout& layout, PortGroup rows, PortGroup cols);

// Ybar_II = Y_II - Y_IR (Y_RR + Y_R)^{-1} Y_RI for an admittance matrix y.
CMatrix loaded_ris_admittance(const CMatrix& y, const PortLayout& layout, const Terminations& term);

// Smallest eigenvalue of the symmetric part of a real matrix.
double min_symmetric_eigenvalue(const RMatrix& m);

// Circularly-symmetric complex Gaussian entries with total variance `variance`.
CMatrix complex_gaussian(int rows, int cols, double variance, std::mt19937_64& rng);

struct ScenarioOptions {
  double z0 = 50.0;
  int max_attempts = 100;
  // When set, Z_IT is fixed (e.g. a near-field link) and only Z_RI is drawn.
  std::optional<CMatrix> fixed_z_it;
  InversionOptions inversion;
};

// Rayleigh far-field scenario: Z_IT ~ CN(0, pathgain_it), Z_RI ~ CN(0, pathgain_ri),
// blocked direct link, matched transmit/receive arrays, Z_II as given. Draws are
// rejected until Re(Y_RR + Y_R) and Re(Ybar_II) are positive definite.
NetworkParameters generate_rayleigh_scenario(const PortLayout& layout, double pathgain_it,
                                             double pathgain_ri, const CMatrix& z_ii,
                                             std::mt19937_64& rng,
                                             const ScenarioOptions& opts = {});

NetworkParameters generate_rayleigh_scenario(const PortLayout& layout, double pathgain_it,
                                             double pathgain_ri, const CMatrix& z_ii,
                                             std::uint64_t seed,
                                             const ScenarioOptions& opts = {});

// Random reciprocal passive multiport: Z = R + iX with R symmetric positive definite and X
// symmetric, entries of order z0. Terminations get positive resistances. Any B_I then
// yields a well-posed channel.
struct RandomNetwork {
  NetworkParameters params;
  Terminations term;
};
RandomNetwork random_passive_network(const PortLayout& layout, double z0, std::mt19937_64& rng);

}  // namespace bdris

#endif  // BDRIS_NETPARAMS_HPP
