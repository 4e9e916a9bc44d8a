#ifndef BDRIS_COUPLING_HPP
#define BDRIS_COUPLING_HPP

#include <vector>

#include "bdris/types.hpp"

namespace bdris {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Thin wire dipoles parallel to the y axis, centred at `positions` in the x-y plane.
struct DipoleGeometry {
  double wavelength = 0.0;  // m
  double length = 0.0;      // m
  std::vector<Point3> positions;

  int size() const { return static_cast<int>(positions.size()); }
  double wavenumber() const { return 2.0 * kPi / wavelength; }

  // nx x ny uniform planar array with element (i, j) at (i * spacing, j * spacing, 0).
  static DipoleGeometry upa(int nx, int ny, double spacing, double wavelength, double length);

  void validate() const;
};

double wavelength_from_frequency(double frequency_hz);

enum class QuadratureRule {
  kTensor,   // fixed-order tensor Gauss-Legendre
  kRefined,  // order n, checked against 2n; falls back to adaptive refinement
  kAdaptive  // quadtree refinement from the start
};

struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::kRefined;
  int points = 32;
  double rel_tol = 1e-8;

  void validate() const;
};

// Mutual impedance (ohms) between two y-directed dipoles of equal length with
// sinusoidal current distributions. Each integration axis is split at the dipole
// centre, where the current has a kink.
cplx dipole_pair_impedance(const Point3& p, const Point3& q, double length, double wavelength,
                           const QuadratureSpec& quad = {});

cplx dipole_mutual_impedance(int p_index, int q_index, const DipoleGeometry& geom,
                             const QuadratureSpec& quad = {});

// Z_II with diagonal z0 and dipole coupling off the diagonal.
CMatrix build_ris_impedance(const DipoleGeometry& geom, double z0, const QuadratureSpec& quad = {});

// Z_IT for n_t transmit dipoles centred at (d + k * tx_spacing, 0, r * wavelength).
// tx_spacing defaults to half a wavelength.
CMatrix near_field_transmitter_link(const DipoleGeometry& geom, double r, double d, int n_t = 1,
                                    const QuadratureSpec& quad = {}, double tx_spacing = -1.0);

}  // namespace bdris

#endif  // BDRIS_COUPLING_HPP
