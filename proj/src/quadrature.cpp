#include "bdris/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace bdris {

namespace {

GaussLegendreRule compute_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n == 1) rule.weights[0] = 2.0;
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre order must be >= 1");
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, compute_rule(n)).first;
  }
  return it->second;
}

cplx tensor_gauss_legendre(const Integrand2d& f, const Rectangle& box, int n) {
  const GaussLegendreRule& rule = gauss_legendre(n);
  const double hx = 0.5 * (box.x1 - box.x0);
  const double cx = 0.5 * (box.x1 + box.x0);
  const double hy = 0.5 * (box.y1 - box.y0);
  const double cy = 0.5 * (box.y1 + box.y0);
  cplx sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = cx + hx * rule.nodes[i];
    cplx row = 0.0;
    for (int j = 0; j < n; ++j) {
      row += rule.weights[j] * f(x, cy + hy * rule.nodes[j]);
    }
    sum += rule.weights[i] * row;
  }
  return sum * hx * hy;
}

namespace {

std::array<Rectangle, 4> split(const Rectangle& b) {
  const double mx = 0.5 * (b.x0 + b.x1);
  const double my = 0.5 * (b.y0 + b.y1);
  return {Rectangle{b.x0, mx, b.y0, my}, Rectangle{mx, b.x1, b.y0, my},
          Rectangle{b.x0, mx, my, b.y1}, Rectangle{mx, b.x1, my, b.y1}};
}

}  // namespace

cplx adaptive_gauss_legendre(const Integrand2d& f, const Rectangle& box, const AdaptiveOptions& opts) {
  // Each panel keeps the sum over its four children and |children - single rule| as the error
  // estimate. The worst panel is split until the summed estimate meets the tolerance.
  struct Panel {
    Rectangle box;
    std::array<cplx, 4> kids;
    cplx value;
    double error;
    int depth;
  };
  auto make = [&](const Rectangle& b, cplx coarse, int depth) {
    Panel p{b, {}, 0.0, 0.0, depth};
    const auto parts = split(b);
    for (int k = 0; k < 4; ++k) {
      p.kids[k] = tensor_gauss_legendre(f, parts[k], opts.points);
      p.value += p.kids[k];
    }
    p.error = std::abs(p.value - coarse);
    return p;
  };
  auto worse = [](const Panel& a, const Panel& b) { return a.error < b.error; };

  std::vector<Panel> heap{make(box, tensor_gauss_legendre(f, box, opts.points), 0)};
  long panels = 5;
  long splits = 0;
  cplx total = heap.front().value;
  double error = heap.front().error;
  while (error > opts.rel_tol * std::abs(total)) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Panel p = heap.back();
    heap.pop_back();
    if (p.depth + 1 >= opts.max_depth || panels + 16 > opts.max_panels) {
      throw QuadratureError("adaptive quadrature did not reach tolerance within budget");
    }
    total -= p.value;
    error -= p.error;
    const auto parts = split(p.box);
    for (int k = 0; k < 4; ++k) {
      Panel child = make(parts[k], p.kids[k], p.depth + 1);
      total += child.value;
      error += child.error;
      heap.push_back(std::move(child));
      std::push_heap(heap.begin(), heap.end(), worse);
    }
    panels += 16;
    // Running sums drift; resum now and then.
    if (++splits % 1024 == 0) {
      total = 0.0;
      error = 0.0;
      for (const auto& q : heap) {
        total += q.value;
        error += q.error;
      }
    }
  }
  return total;
}

}  // namespace bdris
