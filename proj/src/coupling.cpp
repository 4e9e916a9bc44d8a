#include "bdris/coupling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <utility>

#include "bdris/quadrature.hpp"

namespace bdris {

DipoleGeometry DipoleGeometry::upa(int nx, int ny, double spacing, double wavelength, double length) {
  if (nx < 1 || ny < 1) throw InvalidArgument("array dimensions must be >= 1");
  if (!(spacing > 0.0)) throw InvalidArgument("spacing must be positive");
  DipoleGeometry g;
  g.wavelength = wavelength;
  g.length = length;
  g.positions.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      g.positions.push_back({i * spacing, j * spacing, 0.0});
    }
  }
  g.validate();
  return g;
}

void DipoleGeometry::validate() const {
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
  if (!(length > 0.0)) throw InvalidArgument("dipole length must be positive");
  for (size_t a = 0; a < positions.size(); ++a) {
    for (size_t b = a + 1; b < positions.size(); ++b) {
      if (positions[a].x == positions[b].x && positions[a].y == positions[b].y &&
          positions[a].z == positions[b].z) {
        throw InvalidArgument("dipole positions must be distinct");
      }
    }
  }
}

double wavelength_from_frequency(double frequency_hz) {
  if (!(frequency_hz > 0.0)) throw InvalidArgument("frequency must be positive");
  return kSpeedOfLight / frequency_hz;
}

void QuadratureSpec::validate() const {
  if (points < 4) throw InvalidArgument("quadrature needs at least 4 points per axis");
  if (!(rel_tol > 0.0)) throw InvalidArgument("quadrature tolerance must be positive");
}

namespace {

// Field kernel of a y-directed current element observed along y at lateral offset
// sqrt(lateral2) and axial offset dy.
cplx field_kernel(double dy, double lateral2, double k0) {
  const double d2 = lateral2 + dy * dy;
  const double d = std::sqrt(d2);
  const cplx ik(0.0, k0);
  const cplx bracket = (dy * dy / d2) * (3.0 / d2 + 3.0 * ik / d - k0 * k0) - (ik + 1.0 / d) / d + k0 * k0;
  const cplx phase = std::exp(-ik * d) / d;
  return kI * kFreeSpaceImpedance / (4.0 * kPi * k0) * bracket * phase;
}

}  // namespace

cplx dipole_pair_impedance(const Point3& p, const Point3& q, double length, double wavelength,
                           const QuadratureSpec& quad) {
  quad.validate();
  const double dx = q.x - p.x;
  const double dz = q.z - p.z;
  const double lateral2 = dx * dx + dz * dz;
  if (lateral2 == 0.0 && std::abs(q.y - p.y) < length) {
    throw InvalidArgument("collinear dipoles overlap; mutual impedance undefined");
  }
  const double k0 = 2.0 * kPi / wavelength;
  const double half = 0.5 * length;
  const double norm = 1.0 / std::pow(std::sin(k0 * half), 2);

  // x-axis: y' on dipole p, y-axis: y'' on dipole q.
  const Integrand2d f = [&](double y1, double y2) {
    const double cur = std::sin(k0 * (half - std::abs(y1 - p.y))) * std::sin(k0 * (half - std::abs(y2 - q.y)));
    return field_kernel(y2 - y1, lateral2, k0) * (cur * norm);
  };

  const double xs[3] = {p.y - half, p.y, p.y + half};
  const double ys[3] = {q.y - half, q.y, q.y + half};
  std::array<Rectangle, 4> panels;
  int k = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      panels[k++] = Rectangle{xs[a], xs[a + 1], ys[b], ys[b + 1]};
    }
  }

  auto tensor = [&](int n) {
    cplx s = 0.0;
    for (const auto& r : panels) s += tensor_gauss_legendre(f, r, n);
    return s;
  };
  auto adaptive = [&]() {
    AdaptiveOptions opts;
    opts.points = std::min(quad.points, 16);
    opts.rel_tol = quad.rel_tol;
    cplx s = 0.0;
    for (const auto& r : panels) s += adaptive_gauss_legendre(f, r, opts);
    return s;
  };

  switch (quad.rule) {
    case QuadratureRule::kTensor:
      return tensor(quad.points);
    case QuadratureRule::kAdaptive:
      return adaptive();
    case QuadratureRule::kRefined: {
      const cplx coarse = tensor(quad.points);
      const cplx fine = tensor(2 * quad.points);
      if (std::abs(fine - coarse) <= quad.rel_tol * std::abs(fine)) return fine;
      return adaptive();
    }
  }
  return 0.0;
}

cplx dipole_mutual_impedance(int p_index, int q_index, const DipoleGeometry& geom, const QuadratureSpec& quad) {
  if (p_index == q_index) throw InvalidArgument("mutual impedance needs two distinct elements");
  if (p_index < 0 || q_index < 0 || p_index >= geom.size() || q_index >= geom.size()) {
    throw InvalidArgument("element index out of range");
  }
  return dipole_pair_impedance(geom.positions[p_index], geom.positions[q_index], geom.length,
                               geom.wavelength, quad);
}

CMatrix build_ris_impedance(const DipoleGeometry& geom, double z0, const QuadratureSpec& quad) {
  geom.validate();
  const int n = geom.size();
  CMatrix z = CMatrix::Zero(n, n);
  // The kernel only depends on the relative offset, so identical offsets share a value.
  std::map<std::pair<long long, long long>, cplx> memo;
  const double grid = geom.wavelength * 1e-12;
  for (int p = 0; p < n; ++p) {
    z(p, p) = z0;
    for (int q = p + 1; q < n; ++q) {
      const Point3& a = geom.positions[p];
      const Point3& b = geom.positions[q];
      if (a.z != b.z) {
        z(p, q) = z(q, p) = dipole_mutual_impedance(p, q, geom, quad);
        continue;
      }
      const auto key = std::make_pair(std::llround(std::abs(b.x - a.x) / grid),
                                      std::llround(std::abs(b.y - a.y) / grid));
      auto it = memo.find(key);
      if (it == memo.end()) {
        it = memo.emplace(key, dipole_mutual_impedance(p, q, geom, quad)).first;
      }
      z(p, q) = z(q, p) = it->second;
    }
  }
  return z;
}

CMatrix near_field_transmitter_link(const DipoleGeometry& geom, double r, double d, int n_t,
                                    const QuadratureSpec& quad, double tx_spacing) {
  if (!(r > 0.0)) throw InvalidArgument("transmitter distance factor must be positive");
  if (n_t < 1) throw InvalidArgument("n_t must be >= 1");
  geom.validate();
  if (tx_spacing <= 0.0) tx_spacing = 0.5 * geom.wavelength;
  CMatrix z_it(geom.size(), n_t);
  for (int t = 0; t < n_t; ++t) {
    const Point3 tx{d + t * tx_spacing, 0.0, r * geom.wavelength};
    for (int p = 0; p < geom.size(); ++p) {
      z_it(p, t) = dipole_pair_impedance(geom.positions[p], tx, geom.length, geom.wavelength, quad);
    }
  }
  return z_it;
}

}  // namespace bdris
