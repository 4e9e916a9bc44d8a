#include "bdris/sdp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace bdris {

void TwoConstraintSdp::validate() const {
  const auto n = q0.rows();
  if (n < 1 || q0.cols() != n || q1.rows() != n || q1.cols() != n || q2.rows() != n || q2.cols() != n) {
    throw InvalidArgument("SDP data must be square matrices of equal size");
  }
  for (const CMatrix* q : {&q0, &q1, &q2}) {
    const double scale = std::max(1.0, q->cwiseAbs().maxCoeff());
    if ((*q - q->adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InvalidArgument("SDP data must be Hermitian");
    }
  }
  if (q2.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgument("q2 must be nonzero");
}

namespace {

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

BeamformingSdp assemble(const CMatrix& g_w, const CMatrix& g_u, const CMatrix& hbar_it) {
  // Objective ||g_w w + g_u u||^2; constraint ||u|| = ||hbar_it w||.
  const int n_t = static_cast<int>(g_w.cols());
  const int m = static_cast<int>(g_u.cols());
  const int n = n_t + m;
  BeamformingSdp out;
  out.n_t = n_t;
  const double s = spectral_norm(hbar_it);
  out.u_scale = s > 0.0 ? s : 1.0;

  CMatrix g(g_w.rows(), n);
  g << g_w, out.u_scale * g_u;
  CMatrix q0 = g.adjoint() * g;
  const double c = q0.cwiseAbs().maxCoeff();
  out.objective_scale = c > 0.0 ? c : 1.0;
  q0 /= out.objective_scale;

  const CMatrix hit = hbar_it / out.u_scale;
  CMatrix q1 = CMatrix::Zero(n, n);
  q1.topLeftCorner(n_t, n_t) = hit.adjoint() * hit;
  q1.bottomRightCorner(m, m) = -CMatrix::Identity(m, m);
  CMatrix q2 = CMatrix::Zero(n, n);
  q2.topLeftCorner(n_t, n_t).setIdentity();

  out.program.q0 = 0.5 * (q0 + q0.adjoint());
  out.program.q1 = 0.5 * (q1 + q1.adjoint());
  out.program.q2 = q2;
  return out;
}

RMatrix embed(const CMatrix& q) {
  const auto n = q.rows();
  RMatrix r(2 * n, 2 * n);
  r << q.real(), -q.imag(), q.imag(), q.real();
  return 0.5 * (r + r.transpose());
}

CMatrix complexify(const RMatrix& r) {
  const auto n = r.rows() / 2;
  const RMatrix re = 0.5 * (r.topLeftCorner(n, n) + r.bottomRightCorner(n, n));
  const RMatrix im = 0.5 * (r.bottomLeftCorner(n, n) - r.topRightCorner(n, n));
  CMatrix c(n, n);
  c.real() = re;
  c.imag() = im;
  return 0.5 * (c + c.adjoint());
}

RMatrix sym(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha in (0, 1] with m + alpha dm >= 0, given m = l l^T.
double max_step(const Eigen::LLT<RMatrix>& l, const RMatrix& dm) {
  const RMatrix lower = l.matrixL();
  const RMatrix t = lower.triangularView<Eigen::Lower>().solve(
      lower.triangularView<Eigen::Lower>().solve(dm).transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

}  // namespace

BeamformingSdp build_sdp_full(const CompactDecomposition& decomp) {
  return assemble(decomp.hbar_rt, decomp.hbar_ri, decomp.hbar_it);
}

BeamformingSdp build_sdp_reduced(const CompactDecomposition& decomp) {
  const int n_r = decomp.n_r();
  const int n_i = decomp.n_i();
  const int k = std::min(n_r, n_i);
  Eigen::JacobiSVD<CMatrix> svd(decomp.hbar_ri, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const CMatrix& u = svd.matrixU();
  CMatrix dbar = CMatrix::Zero(n_r, k);
  for (int i = 0; i < k; ++i) dbar(i, i) = svd.singularValues()(i);

  BeamformingSdp out = assemble(u.adjoint() * decomp.hbar_rt, dbar, decomp.hbar_it);
  out.reduced = true;
  out.left = u;
  out.lift = svd.matrixV().leftCols(k);
  out.singular_values = svd.singularValues().head(k);
  return out;
}

SdpSolution solve_sdp(const TwoConstraintSdp& sdp, const SdpOptions& opts) {
  sdp.validate();
  const int n = 2 * sdp.dim();
  // Minimization form: min tr(C X) s.t. tr(A_k X) = b_k, with tr(embed(Q) X) = 2 tr(Q X_c).
  const RMatrix c = -0.5 * embed(sdp.q0);
  const std::array<RMatrix, 2> a = {0.5 * embed(sdp.q1), 0.5 * embed(sdp.q2)};
  const Eigen::Vector2d b(0.0, 1.0);

  RMatrix x = RMatrix::Identity(n, n);
  RMatrix z = RMatrix::Identity(n, n);
  Eigen::Vector2d y = Eigen::Vector2d::Zero();
  const double c_norm = c.norm();

  SdpSolution sol;
  auto apply_a = [&](const RMatrix& m) {
    return Eigen::Vector2d((a[0].cwiseProduct(m)).sum(), (a[1].cwiseProduct(m)).sum());
  };

  for (int iter = 0;; ++iter) {
    const Eigen::Vector2d rp = b - apply_a(x);
    const RMatrix rd = c - z - y(0) * a[0] - y(1) * a[1];
    const double pobj = c.cwiseProduct(x).sum();
    const double dobj = b.dot(y);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double compl_gap = x.cwiseProduct(z).sum();
    sol.relative_gap = std::max(std::abs(pobj - dobj), std::abs(compl_gap)) / denom;
    sol.primal_infeasibility = rp.norm() / (1.0 + b.norm());
    sol.dual_infeasibility = rd.norm() / (1.0 + c_norm);
    sol.iterations = iter;
    if (sol.primal_infeasibility < 1e-8 && sol.dual_infeasibility < 1e-8 && pobj < dobj - 1e-7 * denom) {
      ++sol.weak_duality_violations;
    }
    if (sol.relative_gap < opts.tol && sol.primal_infeasibility < opts.tol && sol.dual_infeasibility < opts.tol) {
      break;
    }
    if (iter >= opts.max_iterations) {
      throw SdpError("interior-point method reached the iteration limit (gap " +
                     std::to_string(sol.relative_gap) + ")");
    }
    if (x.cwiseAbs().maxCoeff() > opts.divergence_bound || y.cwiseAbs().maxCoeff() > opts.divergence_bound) {
      throw SdpError("iterates diverged; program is infeasible or unbounded");
    }

    const Eigen::LLT<RMatrix> lx(x);
    const Eigen::LLT<RMatrix> lz(z);
    if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) {
      throw SdpError("iterate lost positive definiteness");
    }
    // Nesterov-Todd scaling point W with W Z W = X.
    const RMatrix llx = lx.matrixL();
    const RMatrix llz = lz.matrixL();
    Eigen::JacobiSVD<RMatrix> svd(llz.transpose() * llx, Eigen::ComputeFullV);
    const RMatrix v = svd.matrixV();
    const RMatrix w = sym(llx * v * svd.singularValues().cwiseInverse().asDiagonal() * v.transpose() *
                          llx.transpose());
    const std::array<RMatrix, 2> waw = {w * a[0] * w, w * a[1] * w};
    Eigen::Matrix2d mm;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) mm(i, j) = a[i].cwiseProduct(waw[j]).sum();
    }
    const auto m_lu = mm.fullPivLu();
    const RMatrix z_inv = lz.solve(RMatrix::Identity(n, n));
    const RMatrix wrdw = w * rd * w;
    const double mu = compl_gap / n;

    auto direction = [&](double sigma, RMatrix& dx, Eigen::Vector2d& dy, RMatrix& dz) {
      const RMatrix t = sigma * mu * z_inv - x - wrdw;
      dy = m_lu.solve(rp - apply_a(t));
      dx = sym(t + dy(0) * waw[0] + dy(1) * waw[1]);
      dz = sym(rd - dy(0) * a[0] - dy(1) * a[1]);
    };

    RMatrix dx, dz;
    Eigen::Vector2d dy;
    direction(0.0, dx, dy, dz);
    const double ap = std::min(1.0, max_step(lx, dx));
    const double ad = std::min(1.0, max_step(lz, dz));
    const double mu_aff = (x + ap * dx).cwiseProduct(z + ad * dz).sum() / n;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    direction(sigma, dx, dy, dz);
    const double alpha_p = std::min(1.0, opts.step_fraction * max_step(lx, dx));
    const double alpha_d = std::min(1.0, opts.step_fraction * max_step(lz, dz));
    x = sym(x + alpha_p * dx);
    y += alpha_d * dy;
    z = sym(z + alpha_d * dz);
  }

  sol.x = complexify(x);
  sol.z = 2.0 * complexify(z);
  sol.y1 = -y(0);
  sol.y2 = -y(1);
  sol.value = (sdp.q0 * sol.x).trace().real();
  sol.dual_value = sol.y2;
  return sol;
}

double eigen_ratio(const CMatrix& x) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (x + x.adjoint()), Eigen::EigenvaluesOnly);
  const RVector& lam = es.eigenvalues();
  const auto n = lam.size();
  if (n < 2) return 0.0;
  if (!(lam(n - 1) > 0.0)) return 1.0;
  return std::max(lam(n - 2), 0.0) / lam(n - 1);
}

namespace {

// Basis of n x n Hermitian matrices as an n^2-dimensional real space.
CMatrix hermitian_basis_element(int n, int index) {
  CMatrix e = CMatrix::Zero(n, n);
  if (index < n) {
    e(index, index) = 1.0;
    return e;
  }
  int k = index - n;
  const int pairs = n * (n - 1) / 2;
  const bool imaginary = k >= pairs;
  if (imaginary) k -= pairs;
  int i = 0;
  while (k >= n - 1 - i) {
    k -= n - 1 - i;
    ++i;
  }
  const int j = i + 1 + k;
  if (imaginary) {
    e(i, j) = cplx(0.0, 1.0);
    e(j, i) = cplx(0.0, -1.0);
  } else {
    e(i, j) = e(j, i) = 1.0;
  }
  return e;
}

void fix_phase(CVector& v) {
  const double scale = v.norm();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      return;
    }
  }
}

}  // namespace

CVector rank_one_extract(const TwoConstraintSdp& sdp, const CMatrix& x, const RankOneOptions& opts) {
  sdp.validate();
  if (x.rows() != sdp.dim() || x.cols() != sdp.dim()) throw InvalidArgument("X has the wrong size");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (x + x.adjoint()));
  RVector lam = es.eigenvalues();
  const int n = sdp.dim();
  const double top = lam(n - 1);
  if (!(top > 0.0)) throw SdpError("X has no positive eigenvalue");

  CVector out;
  if (n == 1 || std::max(lam(n - 2), 0.0) / top < opts.ratio_tol) {
    out = std::sqrt(top) * es.eigenvectors().col(n - 1);
    fix_phase(out);
    return out;
  }

  // Factor X = V V^H over the numerically nonzero spectrum.
  int r = 0;
  for (int i = 0; i < n; ++i) r += lam(i) > 1e-14 * top ? 1 : 0;
  CMatrix v(n, r);
  for (int k = 0; k < r; ++k) {
    v.col(k) = std::sqrt(lam(n - 1 - k)) * es.eigenvectors().col(n - 1 - k);
  }

  int reductions = 0;
  while (r > 1) {
    if (++reductions > opts.max_reductions) throw SdpError("rank reduction did not terminate");
    // Hermitian direction D with tr(V^H Q_k V D) = 0 for all three data matrices.
    const std::array<CMatrix, 3> m = {v.adjoint() * sdp.q0 * v, v.adjoint() * sdp.q1 * v,
                                      v.adjoint() * sdp.q2 * v};
    const int dim = r * r;
    RMatrix lin(3, dim);
    std::vector<CMatrix> basis(dim);
    for (int k = 0; k < dim; ++k) {
      basis[k] = hermitian_basis_element(r, k);
      for (int q = 0; q < 3; ++q) lin(q, k) = (m[q] * basis[k]).trace().real();
    }
    Eigen::JacobiSVD<RMatrix> svd(lin, Eigen::ComputeFullV);
    const RVector coeff = svd.matrixV().col(dim - 1);
    CMatrix d = CMatrix::Zero(r, r);
    for (int k = 0; k < dim; ++k) d += coeff(k) * basis[k];
    Eigen::SelfAdjointEigenSolver<CMatrix> ds(0.5 * (d + d.adjoint()));
    RVector dl = ds.eigenvalues();
    if (std::abs(dl.minCoeff()) > std::abs(dl.maxCoeff())) {
      d = -d;
      dl = -dl.reverse().eval();
    }
    const double delta = std::max(std::abs(dl.maxCoeff()), std::abs(dl.minCoeff()));
    // I - D / delta is PSD with at least one zero eigenvalue.
    const CMatrix keep = CMatrix::Identity(r, r) - d / delta;
    Eigen::SelfAdjointEigenSolver<CMatrix> ks(0.5 * (keep + keep.adjoint()));
    const RVector& kl = ks.eigenvalues();
    int nr = 0;
    for (int i = 0; i < r; ++i) nr += kl(i) > 1e-12 ? 1 : 0;
    if (nr >= r) throw SdpError("rank reduction step failed to lower the rank");
    CMatrix vn(n, nr);
    for (int k = 0; k < nr; ++k) {
      vn.col(k) = v * ks.eigenvectors().col(r - 1 - k) * std::sqrt(std::max(kl(r - 1 - k), 0.0));
    }
    v = vn;
    r = nr;
  }
  out = v.col(0);
  fix_phase(out);
  return out;
}

}  // namespace bdris
