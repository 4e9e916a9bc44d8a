#include "bdris/netparams.hpp"

#include <cmath>

namespace bdris {

PortLayout::PortLayout(int n_t, int n_i, int n_r) : n_t_(n_t), n_i_(n_i), n_r_(n_r) {
  if (n_t < 1 || n_i < 1 || n_r < 1) {
    throw InvalidArgument("port counts must be >= 1");
  }
}

int PortLayout::offset(PortGroup g) const {
  switch (g) {
    case PortGroup::kTransmit: return 0;
    case PortGroup::kRis: return n_t_;
    case PortGroup::kReceive: return n_t_ + n_i_;
  }
  return 0;
}

int PortLayout::size(PortGroup g) const {
  switch (g) {
    case PortGroup::kTransmit: return n_t_;
    case PortGroup::kRis: return n_i_;
    case PortGroup::kReceive: return n_r_;
  }
  return 0;
}

Terminations Terminations::matched(const PortLayout& layout, double z0) {
  if (!(z0 > 0.0)) {
    throw InvalidArgument("reference impedance must be positive");
  }
  Terminations t;
  t.z_t = CVector::Constant(layout.n_t(), cplx(z0, 0.0));
  t.z_r = CVector::Constant(layout.n_r(), cplx(z0, 0.0));
  t.z0 = z0;
  return t;
}

NetworkParameters::NetworkParameters(PortLayout layout, CMatrix z)
    : layout_(layout), z_(std::move(z)) {
  if (z_.rows() != layout_.total() || z_.cols() != layout_.total()) {
    throw InvalidArgument("impedance matrix shape does not match the port layout");
  }
}

CMatrix NetworkParameters::block(PortGroup rows, PortGroup cols) const {
  return partition_block(z_, layout_, rows, cols);
}

void NetworkParameters::set_block(PortGroup rows, PortGroup cols, const CMatrix& value) {
  const int r = layout_.size(rows);
  const int c = layout_.size(cols);
  if (value.rows() != r || value.cols() != c) {
    throw InvalidArgument("block shape mismatch");
  }
  z_.block(layout_.offset(rows), layout_.offset(cols), r, c) = value;
}

double NetworkParameters::reciprocity_error() const {
  const double scale = z_.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (z_ - z_.transpose()).cwiseAbs().maxCoeff() / scale;
}

CMatrix partition_block(const CMatrix& m, const PortLayout& layout, PortGroup rows, PortGroup cols) {
  return m.block(layout.offset(rows), layout.offset(cols), layout.size(rows), layout.size(cols));
}

CMatrix z_to_y(const CMatrix& z, const InversionOptions& opts) {
  if (z.rows() != z.cols()) {
    throw InvalidArgument("z_to_y expects a square matrix");
  }
  Eigen::PartialPivLU<CMatrix> lu(z);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(cond < opts.condition_cap)) {
    throw SingularMatrixError("matrix inversion refused", cond);
  }
  return lu.inverse();
}

CMatrix z_to_s(const CMatrix& z, double z0, const InversionOptions& opts) {
  const auto n = z.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  Eigen::PartialPivLU<CMatrix> lu(z + z0 * id);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(cond < opts.condition_cap)) {
    throw SingularMatrixError("Z + z0 I is singular", cond);
  }
  return lu.solve(z - z0 * id);
}

CMatrix loaded_ris_admittance(const CMatrix& y, const PortLayout& layout, const Terminations& term) {
  using G = PortGroup;
  CMatrix m = partition_block(y, layout, G::kReceive, G::kReceive);
  m.diagonal() += term.y_r();
  const CMatrix y_ir = partition_block(y, layout, G::kRis, G::kReceive);
  const CMatrix y_ri = partition_block(y, layout, G::kReceive, G::kRis);
  return partition_block(y, layout, G::kRis, G::kRis) - y_ir * m.partialPivLu().solve(y_ri);
}

double min_symmetric_eigenvalue(const RMatrix& m) {
  const RMatrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CMatrix complex_gaussian(int rows, int cols, double variance, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  CMatrix out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = cplx(re, im);
    }
  }
  return out;
}

namespace {

bool physically_valid(const NetworkParameters& params, const Terminations& term,
                      const InversionOptions& inversion) {
  using G = PortGroup;
  CMatrix y;
  try {
    y = z_to_y(params.z(), inversion);
  } catch (const SingularMatrixError&) {
    return false;
  }
  const PortLayout& layout = params.layout();
  CMatrix m = partition_block(y, layout, G::kReceive, G::kReceive);
  m.diagonal() += term.y_r();
  if (min_symmetric_eigenvalue(m.real()) <= 0.0) return false;
  const CMatrix ybar = loaded_ris_admittance(y, layout, term);
  return min_symmetric_eigenvalue(ybar.real()) > 0.0;
}

}  // namespace

NetworkParameters generate_rayleigh_scenario(const PortLayout& layout, double pathgain_it,
                                             double pathgain_ri, const CMatrix& z_ii,
                                             std::mt19937_64& rng, const ScenarioOptions& opts) {
  using G = PortGroup;
  if (!(pathgain_it > 0.0) || !(pathgain_ri > 0.0)) {
    throw InvalidArgument("path gains must be positive");
  }
  if (z_ii.rows() != layout.n_i() || z_ii.cols() != layout.n_i()) {
    throw InvalidArgument("Z_II shape does not match n_i");
  }
  if ((z_ii - z_ii.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, z_ii.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("Z_II must be symmetric");
  }
  if (opts.fixed_z_it && (opts.fixed_z_it->rows() != layout.n_i() || opts.fixed_z_it->cols() != layout.n_t())) {
    throw InvalidArgument("fixed Z_IT shape mismatch");
  }
  const Terminations term = Terminations::matched(layout, opts.z0);
  const int n = layout.total();

  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    const CMatrix z_it = opts.fixed_z_it ? *opts.fixed_z_it
                                         : complex_gaussian(layout.n_i(), layout.n_t(), pathgain_it, rng);
    const CMatrix z_ri = complex_gaussian(layout.n_r(), layout.n_i(), pathgain_ri, rng);

    NetworkParameters params(layout, CMatrix::Zero(n, n));
    params.set_block(G::kTransmit, G::kTransmit,
                     opts.z0 * CMatrix::Identity(layout.n_t(), layout.n_t()));
    params.set_block(G::kReceive, G::kReceive,
                     opts.z0 * CMatrix::Identity(layout.n_r(), layout.n_r()));
    params.set_block(G::kRis, G::kRis, z_ii);
    params.set_block(G::kRis, G::kTransmit, z_it);
    params.set_block(G::kTransmit, G::kRis, z_it.transpose());
    params.set_block(G::kReceive, G::kRis, z_ri);
    params.set_block(G::kRis, G::kReceive, z_ri.transpose());

    if (physically_valid(params, term, opts.inversion)) {
      return params;
    }
  }
  throw ResampleBudgetExhausted("no physically valid scenario after " +
                                std::to_string(opts.max_attempts) + " draws");
}

NetworkParameters generate_rayleigh_scenario(const PortLayout& layout, double pathgain_it,
                                             double pathgain_ri, const CMatrix& z_ii,
                                             std::uint64_t seed, const ScenarioOptions& opts) {
  std::mt19937_64 rng(seed);
  return generate_rayleigh_scenario(layout, pathgain_it, pathgain_ri, z_ii, rng, opts);
}

RandomNetwork random_passive_network(const PortLayout& layout, double z0, std::mt19937_64& rng) {
  if (!(z0 > 0.0)) throw InvalidArgument("z0 must be positive");
  const int n = layout.total();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.2, 2.0);
  RMatrix a(n, n);
  RMatrix x(n, n);
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    a(k) = normal(rng);
    x(k) = normal(rng);
  }
  const RMatrix r = (a * a.transpose()) / n + 0.1 * RMatrix::Identity(n, n);
  const RMatrix xs = 0.5 * (x + x.transpose());
  CMatrix z(n, n);
  z.real() = z0 * r;
  z.imag() = z0 * xs;
  Terminations term;
  term.z0 = z0;
  term.z_t.resize(layout.n_t());
  term.z_r.resize(layout.n_r());
  for (auto& v : term.z_t) v = cplx(z0 * uniform(rng), z0 * normal(rng));
  for (auto& v : term.z_r) v = cplx(z0 * uniform(rng), z0 * normal(rng));
  return {NetworkParameters(layout, z), term};
}

}  // namespace bdris
