#include "bdris/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace bdris {

double receive_power(const CMatrix& h, const CVector& w, const CVector& g, double p_t) {
  if (w.size() != h.cols() || g.size() != h.rows()) throw InvalidArgument("w or g has the wrong size");
  const cplx v = g.dot(h * w);  // g^H H w
  return p_t * std::norm(v);
}

double sum_rate(const CMatrix& h, const CMatrix& w, double sigma2) {
  if (w.rows() != h.cols() || w.cols() != h.rows()) throw InvalidArgument("precoder must be n_t x n_r");
  if (!(sigma2 > 0.0)) throw InvalidArgument("noise power must be positive");
  const CMatrix g = h * w;  // g(k, j) = h_k^H w_j
  double rate = 0.0;
  for (Eigen::Index k = 0; k < g.rows(); ++k) {
    const double signal = std::norm(g(k, k));
    const double interference = g.row(k).cwiseAbs2().sum() - signal;
    rate += std::log1p(signal / (interference + sigma2));
  }
  return rate;
}

double spectral_gain(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(h);
  const double s = svd.singularValues()(0);
  return s * s;
}

double relative_performance(double achieved, double reference) {
  if (!(reference > 0.0)) throw InvalidArgument("reference performance must be positive");
  return 100.0 * achieved / reference;
}

double relative_performance(const CompactDecomposition& decomp_true, const RMatrix& b_model,
                            const RMatrix& b_reference) {
  const double f_model = spectral_gain(channel_compact(decomp_true, make_ris_state(decomp_true, b_model)));
  const double f_ref = spectral_gain(channel_compact(decomp_true, make_ris_state(decomp_true, b_reference)));
  return relative_performance(f_model, f_ref);
}

// ---- recovery -------------------------------------------------------------

namespace {

RMatrix masked(const RMatrix& m, const Topology& topology) {
  RMatrix out = RMatrix::Zero(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (topology.allows(static_cast<int>(i), static_cast<int>(j))) out(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
  }
  return out;
}

struct CayleySystem {
  RMatrix m;  // [Re(a+b), Im(a+b)]
  RMatrix t;  // [Re(-i y0 (a-b)), Im(-i y0 (a-b))]
};

CayleySystem cayley_system(const CMatrix& a, const CMatrix& b, double y0) {
  const CMatrix s = a + b;
  const CMatrix d = -kI * y0 * (a - b);
  CayleySystem sys;
  sys.m.resize(a.rows(), 2 * a.cols());
  sys.m << s.real(), s.imag();
  sys.t.resize(a.rows(), 2 * a.cols());
  sys.t << d.real(), d.imag();
  return sys;
}

}  // namespace

CayleyFit fit_cayley_map(const CompactDecomposition& decomp, const CMatrix& a, const CMatrix& b,
                         const Topology& topology) {
  const int n_i = decomp.n_i();
  if (a.rows() != n_i || b.rows() != n_i || a.cols() != b.cols()) {
    throw InvalidArgument("a and b must both be n_i x m");
  }
  if (topology.n_i() != n_i) throw InvalidArgument("topology size does not match n_i");
  const double scale = std::max(a.norm(), b.norm());
  CayleyFit fit;
  if (scale == 0.0) {
    fit.ris = make_ris_state(decomp, RMatrix::Zero(n_i, n_i));
    return fit;
  }
  const CayleySystem sys = cayley_system(a / scale, b / scale, decomp.y0);
  const RMatrix l = decomp.l_factor();

  SymFitProblem p;
  p.l_factor = l;
  p.r_factor = l * sys.m;
  p.gamma1 = sys.t - l * decomp.im_ybar_ii * p.r_factor;
  p.rho = 1.0;
  p.xi = 0.0;
  p.topology = topology;
  p.reference = masked(-decomp.im_ybar_ii, topology);
  const SymFitResult res = solve_symfit(p);

  fit.ris = make_ris_state(decomp, res.b);
  fit.rank_deficient = res.rank_deficient;
  const double bn = b.norm();
  fit.residual = (fit.ris.theta_bar * a - b).norm() / (bn > 0.0 ? bn : 1.0);
  return fit;
}

RisState recover_ris_state(const CVector& u_star, const CVector& w_star, const CompactDecomposition& decomp,
                           const Topology& topology, const RecoveryOptions& opts) {
  if (w_star.size() != decomp.n_t() || u_star.size() != decomp.n_i()) {
    throw InvalidArgument("u or w has the wrong size");
  }
  const CVector a = decomp.hbar_it * w_star;
  const double na = a.norm();
  const double nb = u_star.norm();
  const double big = std::max(na, nb);
  if (big == 0.0) return make_ris_state(decomp, RMatrix::Zero(decomp.n_i(), decomp.n_i()));
  const double norm_gap = std::abs(na - nb) / big;
  if (norm_gap > opts.norm_tol) throw RecoveryError("target and incident vectors differ in norm", norm_gap);

  // A symmetric Bbar with Bbar m = t exists only if m^T t is symmetric.
  const CayleySystem sys = cayley_system(a / big, u_star / big, decomp.y0);
  const RMatrix mt = sys.m.transpose() * sys.t;
  const double asym = (mt - mt.transpose()).norm();
  if (asym > 1e-8 * std::max(sys.m.norm() * sys.t.norm(), 1e-300)) {
    throw RecoveryError("symmetric solvability condition violated", asym);
  }

  const CayleyFit fit = fit_cayley_map(decomp, a, u_star, topology);
  if (!(fit.residual < opts.residual_tol)) {
    throw RecoveryError("no susceptance on this topology maps the incident vector to the target", fit.residual);
  }
  return fit.ris;
}

// ---- SISO -----------------------------------------------------------------

SisoSolution optimize_siso(const CompactDecomposition& decomp, const Topology& topology,
                           const RecoveryOptions& opts) {
  if (decomp.n_t() != 1 || decomp.n_r() != 1) throw InvalidArgument("SISO requires n_t = n_r = 1");
  const cplx h_rt = decomp.hbar_rt(0, 0);
  const CVector h_ri = decomp.hbar_ri.row(0).transpose();
  const CVector h_it = decomp.hbar_it.col(0);
  const double n_ri = h_ri.norm();
  const double n_it = h_it.norm();

  SisoSolution sol;
  sol.upper_bound = std::pow(std::abs(h_rt) + n_ri * n_it, 2);
  if (n_ri == 0.0 || n_it == 0.0) {
    sol.ris = make_ris_state(decomp, RMatrix::Zero(decomp.n_i(), decomp.n_i()));
  } else {
    const cplx phase = std::abs(h_rt) > 0.0 ? h_rt / std::abs(h_rt) : cplx(1.0, 0.0);
    // u = theta_bar h_it aligned with h_ri^H and in phase with the direct term.
    const CVector u = phase * n_it * h_ri.conjugate() / n_ri;
    sol.ris = recover_ris_state(u, CVector::Ones(1), decomp, topology, opts);
    sol.recovery_residual = (sol.ris.theta_bar * h_it - u).norm() / u.norm();
  }
  sol.gain = std::norm(channel_compact(decomp, sol.ris)(0, 0));
  return sol;
}

// ---- MIMO -----------------------------------------------------------------

namespace {

bool bandwidth_covers(const Topology& t, int q_needed) {
  switch (t.kind()) {
    case TopologyKind::kFully: return true;
    case TopologyKind::kBand:
    case TopologyKind::kTridiagonal:
    case TopologyKind::kGeneralized: return t.parameter() >= q_needed;
    case TopologyKind::kSingle: return q_needed == 0;
    case TopologyKind::kGroup: return t.parameter() == 1 || q_needed == 0;
  }
  return false;
}

}  // namespace

MimoSolution optimize_mimo_single_stream(const CompactDecomposition& decomp, const Topology& topology,
                                         double p_t, const MimoOptions& opts) {
  if (!(p_t > 0.0)) throw InvalidArgument("transmit power must be positive");
  const int n_t = decomp.n_t();
  const int n_i = decomp.n_i();
  MimoSolution sol;
  sol.bandwidth_sufficient = bandwidth_covers(topology, optimal_bandwidth(n_t, decomp.n_r(), n_i));

  CVector w;
  if (decomp.hbar_ri.norm() == 0.0 || decomp.hbar_it.norm() == 0.0) {
    // The RIS path is dead; only the direct link matters.
    Eigen::JacobiSVD<CMatrix> svd(decomp.hbar_rt, Eigen::ComputeFullV);
    w = svd.matrixV().col(0);
    sol.ris = make_ris_state(decomp, RMatrix::Zero(n_i, n_i));
    const double s = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    sol.certificate = p_t * s * s;
  } else {
    const BeamformingSdp prog = build_sdp_reduced(decomp);
    const SdpSolution sdp = solve_sdp(prog.program, opts.sdp);
    sol.sdp_iterations = sdp.iterations;
    sol.eigen_ratio = eigen_ratio(sdp.x);
    const CVector x = rank_one_extract(prog.program, sdp.x, opts.rank_one);
    const CVector xw = x.head(n_t);
    const double wn = xw.norm();
    if (!(wn > 0.0)) throw SdpError("extracted precoder is zero");
    w = xw / wn;
    CVector u = prog.lift * (prog.u_scale / wn * x.tail(x.size() - n_t));
    const double target = (decomp.hbar_it * w).norm();
    const double un = u.norm();
    // Remove the solver's last-digit constraint error before recovery.
    if (un > 0.0) u *= target / un;
    sol.ris = recover_ris_state(u, w, decomp, topology, opts.recovery);
    sol.recovery_residual = (sol.ris.theta_bar * decomp.hbar_it * w - u).norm() / std::max(un, 1e-300);
    sol.certificate = p_t * prog.objective_scale * std::max(sdp.dual_value, sdp.value);
  }
  const CVector hw = channel_compact(decomp, sol.ris) * w;
  const double hn = hw.norm();
  sol.w = w;
  sol.g = hn > 0.0 ? CVector(hw / hn) : CVector(CVector::Unit(decomp.n_r(), 0));
  sol.receive_power = p_t * hn * hn;
  return sol;
}

// ---- multiuser ------------------------------------------------------------

void AdmmOptions::validate() const {
  if (!(rho > 0.0) || !(rho_max >= rho)) throw InvalidArgument("rho must be positive and at most rho_max");
  if (!(rho_growth >= 1.0) || !(stall_ratio > 0.0)) throw InvalidArgument("rho_growth must be >= 1 and stall_ratio positive");
  if (!(xi >= 0.0)) throw InvalidArgument("xi must be non-negative");
  if (max_iters < 1 || min_iters < 0 || fp_inner_iters < 1 || polish_iters < 0) throw InvalidArgument("iteration counts must be positive");
  if (!(tol_primal > 0.0) || !(tol_obj >= 0.0)) throw InvalidArgument("tolerances must be positive");
}

namespace {

struct FpAux {
  RVector gamma;  // SINR per user
  CVector y;      // quadratic-transform variables
};

FpAux fp_aux(const CMatrix& h, const CMatrix& w, double sigma2) {
  const CMatrix g = h * w;
  const auto k = g.rows();
  FpAux aux{RVector(k), CVector(k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    const double total = g.row(i).cwiseAbs2().sum() + sigma2;
    const double signal = std::norm(g(i, i));
    aux.gamma(i) = signal / (total - signal);
    aux.y(i) = std::sqrt(1.0 + aux.gamma(i)) * g(i, i) / total;
  }
  return aux;
}

// argmax_W sum_k 2 sqrt(1+g_k) Re(y_k^* h_k^H w_k) - |y_k|^2 sum_j |h_k^H w_j|^2  s.t. ||W||^2 <= p.
CMatrix fp_precoder(const CMatrix& h, const FpAux& aux, double p) {
  const auto k = h.rows();
  const RVector y2 = aux.y.cwiseAbs2();
  const CMatrix a = h.adjoint() * y2.asDiagonal() * h;
  CVector coeff(k);
  for (Eigen::Index i = 0; i < k; ++i) coeff(i) = std::sqrt(1.0 + aux.gamma(i)) * aux.y(i);
  const CMatrix rhs = h.adjoint() * coeff.asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()));
  const RVector& lam = es.eigenvalues();
  const CMatrix c = es.eigenvectors().adjoint() * rhs;
  const double floor = 1e-14 * std::max(lam.maxCoeff(), 1e-300);
  const RVector c2 = c.rowwise().squaredNorm();

  auto norm2 = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam(i) + mu > floor) s += c2(i) / std::pow(lam(i) + mu, 2);
    }
    return s;
  };
  double mu = 0.0;
  if (norm2(0.0) > p) {
    double lo = 0.0;
    double hi = std::sqrt(c2.sum() / p);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (norm2(mid) > p ? lo : hi) = mid;
    }
    mu = hi;
  }
  RVector inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) inv(i) = lam(i) + mu > floor ? 1.0 / (lam(i) + mu) : 0.0;
  CMatrix w = es.eigenvectors() * inv.asDiagonal() * c;
  const double n2 = w.squaredNorm();
  if (n2 > p) w *= std::sqrt(p / n2);
  return w;
}

CMatrix random_precoder(int n_t, int n_r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CMatrix w = complex_gaussian(n_t, n_r, 1.0, rng);
  return w / w.norm();
}

}  // namespace

CMatrix refine_precoders(const CMatrix& h, const CMatrix& w_init, double p_t, double sigma2, int iterations) {
  CMatrix w = w_init;
  double best = sum_rate(h, w, sigma2);
  for (int it = 0; it < iterations; ++it) {
    const CMatrix next = fp_precoder(h, fp_aux(h, w, sigma2), p_t);
    const double rate = sum_rate(h, next, sigma2);
    if (!(rate >= best)) break;
    const bool stalled = rate - best <= 1e-12 * std::max(1.0, rate);
    w = next;
    best = rate;
    if (stalled) break;
  }
  return w;
}

MultiuserSolution optimize_multiuser_admm(const CompactDecomposition& decomp, const Topology& topology,
                                          double p_t, double sigma2, const AdmmOptions& opts) {
  opts.validate();
  if (!(p_t > 0.0) || !(sigma2 > 0.0)) throw InvalidArgument("powers must be positive");
  const int n_t = decomp.n_t();
  const int n_r = decomp.n_r();
  const int n_i = decomp.n_i();
  if (topology.n_i() != n_i) throw InvalidArgument("topology size does not match n_i");

  // Work with unit transmit power and noise, and rescale the RIS links so the auxiliary
  // variable U = (hri theta_bar)^H is of order one.
  const double s = std::sqrt(p_t / sigma2);
  double tau = decomp.hbar_it.norm() / std::sqrt(static_cast<double>(n_i) * n_t);
  if (!(tau > 0.0)) tau = 1.0;
  const CMatrix hrt = s * decomp.hbar_rt;
  const CMatrix hit = decomp.hbar_it / tau;
  const CMatrix hri_h = (s * tau * decomp.hbar_ri).adjoint();  // n_i x n_r
  const RMatrix& lhat = decomp.inv_sqrt_re;
  const RMatrix& im = decomp.im_ybar_ii;
  const CMatrix id = CMatrix::Identity(n_i, n_i);
  const double hri_norm = std::max(hri_h.norm(), 1e-300);

  auto bhat_of = [&](const RMatrix& b) { return RMatrix(lhat * (b + im) * lhat); };
  auto true_channel = [&](const RMatrix& b) { return CMatrix(s * channel_compact(decomp, make_ris_state(decomp, b))); };
  auto residual = [&](const RMatrix& bh, const CMatrix& u) {
    const CMatrix ibh = kI * bh.cast<cplx>();
    return CMatrix((id - ibh) * u - (id + ibh) * hri_h);
  };

  RMatrix b = RMatrix::Zero(n_i, n_i);
  if (opts.initial_b) {
    if (opts.initial_b->rows() != n_i || opts.initial_b->cols() != n_i) throw InvalidArgument("initial_b must be n_i x n_i");
    b = masked(*opts.initial_b, topology);
  }
  RMatrix bh = bhat_of(b);
  CMatrix u;
  {
    const CMatrix ibh = kI * bh.cast<cplx>();
    u = (id - ibh).partialPivLu().solve((id + ibh) * hri_h);
  }
  CMatrix w = random_precoder(n_t, n_r, opts.seed);
  CMatrix lambda = CMatrix::Zero(n_i, n_r);

  MultiuserSolution sol;
  sol.initial_sum_rate = sum_rate(true_channel(b), w, 1.0);
  double best_rate = sol.initial_sum_rate;
  RMatrix best_b = b;
  CMatrix best_w = w;
  CMatrix best_u = u;

  double rho = opts.rho;
  double xi = opts.xi;
  double prev_res = std::numeric_limits<double>::infinity();
  auto augmented = [&](const CMatrix& hs, const CMatrix& c) {
    return -sum_rate(hs, w, 1.0) + (lambda.adjoint() * c).trace().real() + 0.5 * rho * c.squaredNorm();
  };
  const double al0 = augmented(hrt + u.adjoint() * hit, residual(bh, u));
  const double al_cap = 10.0 * std::max(std::abs(al0), 1.0);
  double prev_rate = sol.initial_sum_rate;

  for (int t = 0; t < opts.max_iters; ++t) {
    // (1)-(2) fractional-programming variables and precoders on the relaxed channel.
    CMatrix hs = hrt + u.adjoint() * hit;
    for (int inner = 0; inner < opts.fp_inner_iters; ++inner) w = fp_precoder(hs, fp_aux(hs, w, 1.0), 1.0);
    const FpAux aux = fp_aux(hs, w, 1.0);

    // (3) auxiliary channel, one column per user.
    const CMatrix acol = hit * w;   // a_j = hit w_j
    const CMatrix cmat = hrt * w;   // c_kj = [hrt w_j]_k
    const CMatrix sgram = acol * acol.adjoint();
    const CMatrix ibh = kI * bh.cast<cplx>();
    const CMatrix m = id - ibh;
    const CMatrix mhm = m.adjoint() * m;
    const CMatrix target = (id + ibh) * hri_h - lambda / rho;
    for (int k = 0; k < n_r; ++k) {
      const double y2 = std::norm(aux.y(k));
      const CMatrix lhs = y2 * sgram + 0.5 * rho * mhm;
      const CVector rhs = std::sqrt(1.0 + aux.gamma(k)) * std::conj(aux.y(k)) * acol.col(k) -
                          y2 * acol * cmat.row(k).conjugate().transpose() +
                          0.5 * rho * m.adjoint() * target.col(k);
      u.col(k) = lhs.llt().solve(rhs);
    }

    // (4) susceptance through the masked symmetric fit.
    const CMatrix v = kI * (u + hri_h);
    const CMatrix e = u - hri_h + lambda / rho;
    RMatrix mr(n_i, 2 * n_r);
    mr << v.real(), v.imag();
    RMatrix er(n_i, 2 * n_r);
    er << e.real(), e.imag();
    SymFitProblem fit;
    fit.l_factor = lhat;
    fit.r_factor = lhat * mr;
    fit.gamma1 = er - lhat * im * fit.r_factor;
    fit.gamma2 = bh - lhat * im * lhat;
    fit.rho = rho;
    fit.xi = xi;
    fit.topology = topology;
    b = solve_symfit(fit).b;
    bh = bhat_of(b);

    // (5) multiplier ascent.
    const CMatrix c = residual(bh, u);
    hs = hrt + u.adjoint() * hit;
    const double al = augmented(hs, c);
    lambda += rho * c;

    const double rel_res = c.norm() / hri_norm;
    // Stiffen the penalty while the coupling residual stalls; the prox weight follows.
    if (rel_res > opts.tol_primal && rel_res > opts.stall_ratio * prev_res && rho < opts.rho_max) {
      const double next = std::min(rho * opts.rho_growth, opts.rho_max);
      xi *= next / rho;
      rho = next;
    }
    prev_res = rel_res;
    const double rate = sum_rate(true_channel(b), w, 1.0);
    if (rate > best_rate) {
      best_rate = rate;
      best_b = b;
      best_w = w;
      best_u = u;
    }
    sol.trace.push_back({al, rel_res, rate});
    sol.iterations = t + 1;
    if (!std::isfinite(al) || al > al_cap) {
      throw ConvergenceError("augmented Lagrangian diverged at iteration " + std::to_string(t + 1));
    }
    const bool settled = std::abs(rate - prev_rate) <= opts.tol_obj * std::max(1.0, std::abs(rate));
    prev_rate = rate;
    if (t + 1 >= opts.min_iters && rel_res < opts.tol_primal && settled) {
      sol.converged = true;
      break;
    }
  }

  const CMatrix h_best = true_channel(best_b);
  const CMatrix w_polished = refine_precoders(h_best, best_w, 1.0, 1.0, opts.polish_iters);
  const double polished = sum_rate(h_best, w_polished, 1.0);
  if (polished > best_rate) {
    best_rate = polished;
    best_w = w_polished;
  }

  const double unit = opts.rate_in_bits ? 1.0 / std::log(2.0) : 1.0;
  sol.w = std::sqrt(p_t) * best_w;
  sol.ris = make_ris_state(decomp, best_b);
  sol.u = best_u / (s * tau);
  sol.sum_rate = best_rate * unit;
  sol.initial_sum_rate *= unit;
  for (auto& entry : sol.trace) entry.sum_rate *= unit;
  return sol;
}

}  // namespace bdris
