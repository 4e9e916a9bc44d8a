#include "bdris/channels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bdris {

namespace {

using G = PortGroup;

Eigen::PartialPivLU<CMatrix> checked_lu(const CMatrix& m, const std::string& name, double cap) {
  Eigen::PartialPivLU<CMatrix> lu(m);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(cond < cap)) throw SingularMatrixError(name + " is singular", cond);
  return lu;
}

void check_susceptance(const RMatrix& b_i, int n_i) {
  if (b_i.rows() != n_i || b_i.cols() != n_i) {
    throw InvalidArgument("susceptance matrix must be n_i x n_i");
  }
  const double scale = std::max(1.0, b_i.cwiseAbs().maxCoeff());
  if ((b_i - b_i.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("susceptance matrix must be symmetric");
  }
}

void check_terminations(const Terminations& term, const PortLayout& layout) {
  if (term.z_t.size() != layout.n_t() || term.z_r.size() != layout.n_r()) {
    throw InvalidArgument("termination sizes do not match the port layout");
  }
  if (!(term.z0 > 0.0)) throw InvalidArgument("reference impedance must be positive");
}

RMatrix symmetrize(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

CompactDecomposition compact_decompose(const NetworkParameters& params, const Terminations& term,
                                       const DecomposeOptions& opts) {
  const PortLayout& layout = params.layout();
  check_terminations(term, layout);
  const double cap = opts.inversion.condition_cap;
  const CMatrix y = z_to_y(params.z(), opts.inversion);
  auto blk = [&](G r, G c) { return partition_block(y, layout, r, c); };

  CMatrix k = blk(G::kReceive, G::kReceive);
  k.diagonal() += term.y_r();
  const auto k_lu = checked_lu(k, "Y_R + Y_RR", cap);
  const CMatrix k_y_rt = k_lu.solve(blk(G::kReceive, G::kTransmit));
  const CMatrix k_y_ri = k_lu.solve(blk(G::kReceive, G::kRis));
  const CMatrix y_ir = blk(G::kRis, G::kReceive);

  const CMatrix ybar_ii = blk(G::kRis, G::kRis) - y_ir * k_y_ri;
  const double asym = (ybar_ii - ybar_ii.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * std::max(ybar_ii.cwiseAbs().maxCoeff(), 1e-300)) {
    throw InvalidArgument("loaded RIS admittance is not symmetric");
  }

  CompactDecomposition d;
  d.y0 = term.y0();
  d.re_ybar_ii = symmetrize(ybar_ii.real());
  d.im_ybar_ii = symmetrize(ybar_ii.imag());

  Eigen::SelfAdjointEigenSolver<RMatrix> es(d.re_ybar_ii);
  const RVector& lam = es.eigenvalues();
  const double lmin = lam.minCoeff();
  if (!(lmin > opts.eigen_floor * std::max(lam.maxCoeff(), 0.0)) || !(lmin > 0.0)) {
    throw LemmaViolation(lmin);
  }
  const RMatrix& v = es.eigenvectors();
  d.sqrt_re = symmetrize(v * lam.cwiseSqrt().asDiagonal() * v.transpose());
  d.inv_sqrt_re = symmetrize(v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose());

  const double y0 = d.y0;
  const CMatrix inv_sqrt = d.inv_sqrt_re.cast<cplx>();
  const CMatrix ybar_rt = 2.0 * y0 * k_y_rt;
  const CMatrix ybar_ri = std::sqrt(2.0) * y0 * k_y_ri * inv_sqrt;
  const CMatrix ybar_it = std::sqrt(2.0) * y0 * inv_sqrt * (blk(G::kRis, G::kTransmit) - y_ir * k_y_rt);

  d.hbar_ri = -ybar_ri / (2.0 * y0);
  d.hbar_it = -ybar_it / (2.0 * y0);
  d.hbar_rt = -(ybar_rt - ybar_ri * ybar_it / (2.0 * y0)) / (2.0 * y0);
  return d;
}

RMatrix b_to_bbar(const CompactDecomposition& decomp, const RMatrix& b_i) {
  check_susceptance(b_i, decomp.n_i());
  return symmetrize(decomp.y0 * decomp.inv_sqrt_re * (b_i + decomp.im_ybar_ii) * decomp.inv_sqrt_re);
}

RMatrix bbar_to_b(const CompactDecomposition& decomp, const RMatrix& bbar_i) {
  check_susceptance(bbar_i, decomp.n_i());
  return symmetrize(decomp.sqrt_re * bbar_i * decomp.sqrt_re / decomp.y0 - decomp.im_ybar_ii);
}

CMatrix cayley_transform(const RMatrix& bbar, double y0) {
  const int n = static_cast<int>(bbar.rows());
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix ib = kI * bbar.cast<cplx>();
  // y0 I + i bbar is invertible for any real symmetric bbar since its eigenvalues are y0 + i lambda.
  return (y0 * id + ib).partialPivLu().solve(y0 * id - ib);
}

RisState make_ris_state(const CompactDecomposition& decomp, const RMatrix& b_i) {
  RisState s;
  s.b_i = symmetrize(b_i);
  s.bbar_i = b_to_bbar(decomp, s.b_i);
  s.theta_bar = cayley_transform(s.bbar_i, decomp.y0);
  return s;
}

RisState make_ris_state_from_bbar(const CompactDecomposition& decomp, const RMatrix& bbar_i) {
  RisState s;
  s.bbar_i = symmetrize(bbar_i);
  s.b_i = bbar_to_b(decomp, s.bbar_i);
  s.theta_bar = cayley_transform(s.bbar_i, decomp.y0);
  return s;
}

CMatrix channel_compact(const CompactDecomposition& decomp, const CMatrix& theta_bar) {
  if (theta_bar.rows() != decomp.n_i() || theta_bar.cols() != decomp.n_i()) {
    throw InvalidArgument("theta_bar must be n_i x n_i");
  }
  return decomp.hbar_rt + decomp.hbar_ri * theta_bar * decomp.hbar_it;
}

CMatrix channel_compact(const CompactDecomposition& decomp, const RisState& state) {
  return channel_compact(decomp, state.theta_bar);
}

CMatrix channel_exact(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i) {
  const PortLayout& layout = params.layout();
  check_terminations(term, layout);
  check_susceptance(b_i, layout.n_i());
  CMatrix m = z_to_y(params.z());
  const int ot = layout.offset(G::kTransmit);
  const int oi = layout.offset(G::kRis);
  const int orr = layout.offset(G::kReceive);
  m.diagonal().segment(ot, layout.n_t()) += term.y_t();
  m.block(oi, oi, layout.n_i(), layout.n_i()) += kI * b_i.cast<cplx>();
  m.diagonal().segment(orr, layout.n_r()) += term.y_r();
  // Port voltages solve (Y + Y_load) v = [Y_T v_s; 0; 0]; only the first block column of
  // the inverse is needed, and H maps v_T to v_R.
  const auto lu = checked_lu(m, "Y + blkdiag(Y_T, iB_I, Y_R)", 1e14);
  CMatrix rhs = CMatrix::Zero(layout.total(), layout.n_t());
  rhs.topRows(layout.n_t()).setIdentity();
  const CMatrix col = lu.solve(rhs);
  const CMatrix m_tt = col.middleRows(ot, layout.n_t());
  const CMatrix m_rt = col.middleRows(orr, layout.n_r());
  // H = M_RT M_TT^{-1}
  const auto tt_lu = checked_lu(m_tt.transpose(), "transmit block of the loaded network", 1e14);
  return tt_lu.solve(m_rt.transpose()).transpose();
}

CMatrix channel_explicit(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i) {
  const PortLayout& layout = params.layout();
  check_terminations(term, layout);
  check_susceptance(b_i, layout.n_i());
  const CMatrix y = z_to_y(params.z());
  auto blk = [&](G r, G c) { return partition_block(y, layout, r, c); };

  CMatrix k = blk(G::kReceive, G::kReceive);
  k.diagonal() += term.y_r();
  const auto k_lu = checked_lu(k, "Y_R + Y_RR", 1e14);
  const CMatrix y_ir = blk(G::kRis, G::kReceive);
  const CMatrix k_y_rt = k_lu.solve(blk(G::kReceive, G::kTransmit));
  const CMatrix schur = kI * b_i.cast<cplx>() + blk(G::kRis, G::kRis) - y_ir * k_lu.solve(blk(G::kReceive, G::kRis));
  const auto s_lu = checked_lu(schur, "Y_I + Y_II - Y_IR (Y_R + Y_RR)^{-1} Y_RI", 1e14);
  const CMatrix inner = s_lu.solve(blk(G::kRis, G::kTransmit) - y_ir * k_y_rt);
  return k_lu.solve(-blk(G::kReceive, G::kTransmit) + blk(G::kReceive, G::kRis) * inner);
}

namespace {

// Z_RT - Z_RI (Z_I + z_ii)^{-1} Z_IT with Z_I = (i B_I)^{-1}, evaluated as
// (Z_I + z_ii)^{-1} = (I + i B_I z_ii)^{-1} i B_I so that B_I need not be invertible.
CMatrix unilateral_core(const NetworkParameters& params, const CMatrix& z_ii, const RMatrix& b_i) {
  const int n_i = params.layout().n_i();
  const CMatrix y_i = kI * b_i.cast<cplx>();
  const CMatrix m = CMatrix::Identity(n_i, n_i) + y_i * z_ii;
  const auto lu = checked_lu(m, "Z_I + Z_II", 1e14);
  const CMatrix z_it = params.block(G::kRis, G::kTransmit);
  return params.block(G::kReceive, G::kTransmit) - params.block(G::kReceive, G::kRis) * lu.solve(y_i * z_it);
}

}  // namespace

CMatrix channel_app1(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i) {
  const PortLayout& layout = params.layout();
  check_terminations(term, layout);
  check_susceptance(b_i, layout.n_i());
  const CMatrix core = unilateral_core(params, params.block(G::kRis, G::kRis), b_i);
  CMatrix zr_plus = params.block(G::kReceive, G::kReceive);
  zr_plus.diagonal() += term.z_r;
  const auto r_lu = checked_lu(zr_plus, "Z_R + Z_RR", 1e14);
  const auto t_lu = checked_lu(params.block(G::kTransmit, G::kTransmit).transpose(), "Z_TT", 1e14);
  const CMatrix left = term.z_r.asDiagonal() * r_lu.solve(core);
  // left * Z_TT^{-1}
  return t_lu.solve(left.transpose()).transpose();
}

CMatrix channel_app2(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i) {
  check_terminations(term, params.layout());
  check_susceptance(b_i, params.layout().n_i());
  return unilateral_core(params, params.block(G::kRis, G::kRis), b_i) / (2.0 * term.z0);
}

CMatrix channel_app3(const NetworkParameters& params, const Terminations& term, const RMatrix& b_i) {
  check_terminations(term, params.layout());
  const int n_i = params.layout().n_i();
  check_susceptance(b_i, n_i);
  const CMatrix z_ii = term.z0 * CMatrix::Identity(n_i, n_i);
  return unilateral_core(params, z_ii, b_i) / (2.0 * term.z0);
}

std::string to_string(ChannelModel model) {
  switch (model) {
    case ChannelModel::kExact: return "exact";
    case ChannelModel::kApp1: return "app1";
    case ChannelModel::kApp2: return "app2";
    case ChannelModel::kApp3: return "app3";
  }
  return "unknown";
}

ChannelModel parse_channel_model(const std::string& name) {
  if (name == "exact") return ChannelModel::kExact;
  if (name == "app1") return ChannelModel::kApp1;
  if (name == "app2") return ChannelModel::kApp2;
  if (name == "app3") return ChannelModel::kApp3;
  throw InvalidArgument("unknown channel model '" + name + "'");
}

CMatrix channel(ChannelModel model, const NetworkParameters& params, const Terminations& term,
                const RMatrix& b_i) {
  switch (model) {
    case ChannelModel::kExact: return channel_exact(params, term, b_i);
    case ChannelModel::kApp1: return channel_app1(params, term, b_i);
    case ChannelModel::kApp2: return channel_app2(params, term, b_i);
    case ChannelModel::kApp3: return channel_app3(params, term, b_i);
  }
  throw InvalidArgument("unknown channel model");
}

std::pair<NetworkParameters, Terminations> model_inputs(const NetworkParameters& params,
                                                         const Terminations& term, ChannelModel model) {
  const PortLayout& layout = params.layout();
  NetworkParameters out = params;
  Terminations t = term;
  if (model == ChannelModel::kExact) return {out, t};

  out.set_block(G::kTransmit, G::kRis, CMatrix::Zero(layout.n_t(), layout.n_i()));
  out.set_block(G::kTransmit, G::kReceive, CMatrix::Zero(layout.n_t(), layout.n_r()));
  out.set_block(G::kRis, G::kReceive, CMatrix::Zero(layout.n_i(), layout.n_r()));
  if (model == ChannelModel::kApp1) return {out, t};

  out.set_block(G::kTransmit, G::kTransmit, term.z0 * CMatrix::Identity(layout.n_t(), layout.n_t()));
  out.set_block(G::kReceive, G::kReceive, term.z0 * CMatrix::Identity(layout.n_r(), layout.n_r()));
  t = Terminations::matched(layout, term.z0);
  if (model == ChannelModel::kApp2) return {out, t};

  out.set_block(G::kRis, G::kRis, term.z0 * CMatrix::Identity(layout.n_i(), layout.n_i()));
  return {out, t};
}

}  // namespace bdris
