#ifndef BDRIS_QUADRATURE_HPP
#define BDRIS_QUADRATURE_HPP

#include <functional>
#include <vector>

#include "bdris/types.hpp"

namespace bdris {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule via Newton iteration on P_n. Rules are cached per n.
const GaussLegendreRule& gauss_legendre(int n);

struct Rectangle {
  double x0, x1;
  double y0, y1;
};

using Integrand2d = std::function<cplx(double, double)>;

// Tensor-product n x n Gauss-Legendre rule over a rectangle.
cplx tensor_gauss_legendre(const Integrand2d& f, const Rectangle& box, int n);

struct AdaptiveOptions {
  int points = 16;          // per axis, per panel
  double rel_tol = 1e-10;   // on the summed panel error estimates, relative to |total|
  int max_depth = 40;
  long max_panels = 200000;
};

// Globally adaptive quadtree: each panel's error is estimated as |sum over its four
// children - single-rule value|, and the worst panel is split until the summed estimate
// is at most rel_tol * |total|. Throws QuadratureError when the panel budget or depth is
// exhausted.
cplx adaptive_gauss_legendre(const Integrand2d& f, const Rectangle& box, const AdaptiveOptions& opts);

}  // namespace bdris

#endif  // BDRIS_QUADRATURE_HPP
