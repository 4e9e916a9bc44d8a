#include "bdris/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "bdris/channels.hpp"
#include "bdris/netparams.hpp"
#include "bdris/optim.hpp"
#include "bdris/symfit.hpp"

namespace bdris {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"experiment", "sweep_var",    "sweep_value", "trial",
                                                "model",      "topology",     "metric_name", "metric_value",
                                                "relative_pct", "wall_ms",    "failures"};
  return cols;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.sweep_var << ',' << r.sweep_value << ',' << r.trial << ',' << r.model << ','
        << r.topology << ',' << r.metric_name << ',' << format_number(r.metric_value) << ','
        << format_number(r.relative_pct) << ',' << format_number(r.wall_ms) << ',' << r.failures << '\n';
  }
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ (trial + 0x632be59bd9b4e019ULL));
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BDRIS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

DipoleGeometry ris_geometry(int n_i, double spacing_wavelengths, double wavelength, double length_wavelengths) {
  if (n_i < 1) throw InvalidArgument("n_i must be >= 1");
  int nx = 1;
  for (int k = 1; k * k <= n_i; ++k) {
    if (n_i % k == 0) nx = k;
  }
  return DipoleGeometry::upa(nx, n_i / nx, spacing_wavelengths * wavelength, wavelength,
                             length_wavelengths * wavelength);
}

Topology resolve_topology(const std::string& spec, int n_t, int n_r, int n_i) {
  if (spec == "optimal") {
    const int q = optimal_bandwidth(n_t, n_r, n_i);
    return q == 0 ? Topology::single(n_i) : Topology::band(n_i, q);
  }
  return Topology::parse(spec, n_i);
}

namespace {

// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <class Fn>
void parallel_for(int count, int threads, Fn fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct SweepPoint {
  int n_i;
  double spacing;
  double distance;
};

struct ModelOutcome {
  double metric = 0.0;
  double wall_ms = 0.0;
};

struct PointData {
  CMatrix z_ii;
  std::optional<CMatrix> z_it;
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "/" : "") + parts[i];
  return out;
}

class TrialRunner {
public:
  TrialRunner(const ExperimentConfig& cfg, const SweepPoint& pt, const PointData& data, const Topology& topology)
      : cfg_(cfg), pt_(pt), data_(data), topology_(topology) {}

  // Metric per model in cfg.models order, plus the exact-model reference.
  std::pair<std::vector<ModelOutcome>, double> operator()(int trial) const {
    std::mt19937_64 rng(trial_seed(cfg_.seed, static_cast<std::uint64_t>(trial)));
    const PortLayout layout(cfg_.n_t, pt_.n_i, cfg_.n_r);
    ScenarioOptions sopts;
    sopts.z0 = cfg_.z0;
    sopts.fixed_z_it = data_.z_it;
    const NetworkParameters params =
        generate_rayleigh_scenario(layout, cfg_.pathgain_it, cfg_.pathgain_ri, data_.z_ii, rng, sopts);
    const Terminations term = Terminations::matched(layout, cfg_.z0);
    const CompactDecomposition truth = compact_decompose(params, term);

    std::map<ChannelModel, ModelOutcome> cache;
    auto solve = [&](ChannelModel m) {
      const auto it = cache.find(m);
      if (it != cache.end()) return it->second;
      const auto t0 = std::chrono::steady_clock::now();
      const auto [p_m, t_m] = model_inputs(params, term, m);
      const CompactDecomposition d_m = compact_decompose(p_m, t_m);
      ModelOutcome out;
      out.metric = optimize_and_evaluate(truth, d_m, trial);
      if (cfg_.record_timing) {
        out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
      cache.emplace(m, out);
      return out;
    };
    const double reference = solve(ChannelModel::kExact).metric;
    std::vector<ModelOutcome> outcomes;
    for (ChannelModel m : cfg_.models) outcomes.push_back(solve(m));
    return {outcomes, reference};
  }

private:
  double optimize_and_evaluate(const CompactDecomposition& truth, const CompactDecomposition& model,
                               int trial) const {
    const double p_t = dbm_to_watts(cfg_.p_t_dbm);
    const double sigma2 = dbm_to_watts(cfg_.sigma2_dbm);
    auto true_channel = [&](const RMatrix& b) { return channel_compact(truth, make_ris_state(truth, b)); };
    switch (cfg_.system) {
      case SystemKind::kSiso: {
        const SisoSolution s = optimize_siso(model, topology_);
        return p_t * spectral_gain(true_channel(s.ris.b_i));
      }
      case SystemKind::kMimoSingleStream: {
        const MimoSolution s = optimize_mimo_single_stream(model, topology_, p_t);
        return p_t * spectral_gain(true_channel(s.ris.b_i));
      }
      case SystemKind::kMultiuserMiso: {
        AdmmOptions o;
        o.rho = cfg_.admm_rho;
        o.xi = cfg_.admm_xi;
        o.max_iters = cfg_.admm_max_iters;
        o.tol_primal = cfg_.admm_tol_primal;
        o.tol_obj = cfg_.admm_tol_obj;
        o.seed = trial_seed(cfg_.seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(trial));
        if (cfg_.admm_init == "identity") {
          const int n = model.n_i();
          RMatrix b0 = -model.im_ybar_ii;
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              if (!topology_.allows(i, j)) b0(i, j) = 0.0;
            }
          }
          o.initial_b = b0;
        }
        const MultiuserSolution s = optimize_multiuser_admm(model, topology_, p_t, sigma2, o);
        const double rate = sum_rate(true_channel(s.ris.b_i), s.w, sigma2);
        return cfg_.rate_in_bits ? rate / std::log(2.0) : rate;
      }
    }
    return 0.0;
  }

  const ExperimentConfig& cfg_;
  const SweepPoint& pt_;
  const PointData& data_;
  const Topology& topology_;
};

}  // namespace

std::vector<CsvRow> run(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool near = cfg.scenario == ScenarioKind::kNearFieldTx;
  const std::vector<double> distances = near ? cfg.distance : std::vector<double>{cfg.distance.front()};

  std::vector<SweepPoint> points;
  for (int n : cfg.n_i) {
    for (double d : cfg.spacing) {
      for (double r : distances) points.push_back({n, d, r});
    }
  }
  std::vector<std::string> axes;
  if (cfg.n_i.size() > 1) axes.push_back("n_i");
  if (cfg.spacing.size() > 1) axes.push_back("spacing");
  if (near && distances.size() > 1) axes.push_back("distance");
  if (axes.empty()) axes.push_back(near ? "distance" : "n_i");

  const double wavelength = wavelength_from_frequency(cfg.frequency_hz);
  QuadratureSpec quad;
  quad.points = cfg.quad_points;
  const int threads = resolve_threads(cfg.threads);
  const std::string metric_name = cfg.system == SystemKind::kMultiuserMiso
                                      ? (cfg.rate_in_bits ? "sum_rate_bits" : "sum_rate_nats")
                                      : "receive_power_w";

  std::vector<CsvRow> rows;
  for (const SweepPoint& pt : points) {
    std::vector<std::string> values;
    for (const auto& a : axes) {
      if (a == "n_i") values.push_back(std::to_string(pt.n_i));
      if (a == "spacing") values.push_back(format_number(pt.spacing));
      if (a == "distance") values.push_back(format_number(pt.distance));
    }
    const std::string sweep_value = join(values);

    const DipoleGeometry geom = ris_geometry(pt.n_i, pt.spacing, wavelength, cfg.dipole_length);
    PointData data;
    data.z_ii = build_ris_impedance(geom, cfg.z0, quad);
    if (near) data.z_it = near_field_transmitter_link(geom, pt.distance, pt.spacing * wavelength, cfg.n_t, quad);
    const Topology topology = resolve_topology(cfg.topology, cfg.n_t, cfg.n_r, pt.n_i);
    const TrialRunner runner(cfg, pt, data, topology);

    using Result = std::pair<std::vector<ModelOutcome>, double>;
    std::vector<std::optional<Result>> results(cfg.trials);
    std::vector<std::string> errors(cfg.trials);
    parallel_for(cfg.trials, threads, [&](int t) {
      try {
        results[t] = runner(t);
      } catch (const std::exception& e) {
        errors[t] = e.what();
      }
    });

    int failures = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      if (!results[t]) {
        ++failures;
        std::cerr << "[" << cfg.experiment << " " << sweep_value << "] trial " << t << " skipped: " << errors[t]
                  << '\n';
      }
    }
    const std::size_t nm = cfg.models.size();
    std::vector<double> sum_metric(nm, 0.0), sum_rel(nm, 0.0), sum_ms(nm, 0.0);
    int ok = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      if (!results[t]) continue;
      ++ok;
      const auto& [outs, reference] = *results[t];
      for (std::size_t m = 0; m < nm; ++m) {
        const double rel = reference > 0.0 ? 100.0 * outs[m].metric / reference
                                            : std::numeric_limits<double>::quiet_NaN();
        rows.push_back({cfg.experiment, join(axes), sweep_value, std::to_string(t), to_string(cfg.models[m]),
                        topology.name(), metric_name, outs[m].metric, rel, outs[m].wall_ms, 0});
        sum_metric[m] += outs[m].metric;
        sum_rel[m] += rel;
        sum_ms[m] += outs[m].wall_ms;
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t m = 0; m < nm; ++m) {
      rows.push_back({cfg.experiment, join(axes), sweep_value, "mean", to_string(cfg.models[m]), topology.name(),
                      metric_name, ok ? sum_metric[m] / ok : nan, ok ? sum_rel[m] / ok : nan,
                      ok ? sum_ms[m] / ok : nan, failures});
    }
  }
  return rows;
}

std::vector<CsvRow> validate_prop2(const Prop2Options& opts) {
  if (opts.trials < 1) throw InvalidArgument("trials must be >= 1");
  const int q = opts.q < 0 ? optimal_bandwidth(opts.n_t, opts.n_r, opts.n_i) : std::min(opts.q, opts.n_i - 1);
  const Topology band = q == 0 ? Topology::single(opts.n_i) : Topology::band(opts.n_i, q);
  const double wavelength = wavelength_from_frequency(opts.frequency_hz);
  const CMatrix z_ii = build_ris_impedance(ris_geometry(opts.n_i, opts.spacing, wavelength, 0.25), opts.z0);
  const PortLayout layout(opts.n_t, opts.n_i, opts.n_r);
  const double y0 = 1.0 / opts.z0;

  std::vector<double> mismatch(opts.trials, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(opts.trials);
  parallel_for(opts.trials, resolve_threads(opts.threads), [&](int t) {
    try {
      std::mt19937_64 rng(trial_seed(opts.seed, static_cast<std::uint64_t>(t)));
      ScenarioOptions sopts;
      sopts.z0 = opts.z0;
      const NetworkParameters params = generate_rayleigh_scenario(
          layout, 4.0 * opts.z0 * opts.z0 * 1e-8, 4.0 * opts.z0 * opts.z0 * 1e-4, z_ii, rng, sopts);
      const CompactDecomposition decomp = compact_decompose(params, Terminations::matched(layout, opts.z0));
      std::normal_distribution<double> normal(0.0, y0);
      RMatrix g(opts.n_i, opts.n_i);
      for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = normal(rng);
      const RisState full = make_ris_state(decomp, RMatrix(0.5 * (g + g.transpose())));
      // The band state only has to reproduce theta on the smaller side's subspace.
      const CMatrix a = opts.n_t <= opts.n_r ? CMatrix(decomp.hbar_it) : CMatrix(decomp.hbar_ri.transpose());
      const CayleyFit fit = fit_cayley_map(decomp, a, full.theta_bar * a, band);
      const CMatrix h_full = channel_compact(decomp, full);
      mismatch[t] = (channel_compact(decomp, fit.ris) - h_full).norm() / h_full.norm();
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });

  std::vector<CsvRow> rows;
  const std::string sweep_value = std::to_string(q);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  int failures = 0;
  for (int t = 0; t < opts.trials; ++t) {
    if (!errors[t].empty()) {
      ++failures;
      std::cerr << "[prop2] trial " << t << " skipped: " << errors[t] << '\n';
      continue;
    }
    rows.push_back({"prop2", "q", sweep_value, std::to_string(t), "exact", band.name(), "relative_mismatch",
                    mismatch[t], nan, 0.0, 0});
  }
  std::vector<double> ok;
  for (double m : mismatch) {
    if (!std::isnan(m)) ok.push_back(m);
  }
  double mean = nan;
  if (!ok.empty()) {
    mean = 0.0;
    for (double m : ok) mean += m;
    mean /= static_cast<double>(ok.size());
  }
  rows.push_back({"prop2", "q", sweep_value, "mean", "exact", band.name(), "relative_mismatch", mean, nan, 0.0,
                  failures});
  return rows;
}

// ---- selftest -------------------------------------------------------------

namespace {

struct Check {
  std::ostream& out;
  bool all = true;
  void operator()(const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    all = all && ok;
  }
};

double rel_err(const CMatrix& a, const CMatrix& b) {
  const double s = std::max(a.norm(), b.norm());
  return s > 0.0 ? (a - b).norm() / s : 0.0;
}

RMatrix random_susceptance(int n, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  RMatrix g(n, n);
  for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = normal(rng);
  return 0.5 * (g + g.transpose());
}

}  // namespace

bool selftest(std::ostream& out) {
  Check check{out};
  std::mt19937_64 rng(20240601);

  {
    double worst = 0.0;
    double min_eig = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 50; ++k) {
      const PortLayout layout(1 + k % 3, 2 + k % 7, 1 + (k / 3) % 3);
      const RandomNetwork net = random_passive_network(layout, 50.0, rng);
      const RMatrix b = random_susceptance(layout.n_i(), 0.02, rng);
      const CompactDecomposition d = compact_decompose(net.params, net.term);
      min_eig = std::min(min_eig, min_symmetric_eigenvalue(d.re_ybar_ii));
      const CMatrix h = channel_exact(net.params, net.term, b);
      worst = std::max({worst, rel_err(h, channel_explicit(net.params, net.term, b)),
                        rel_err(h, channel_compact(d, make_ris_state(d, b)))});
    }
    check("channel forms agree", worst < 1e-10, "max rel err " + format_number(worst));
    check("loaded admittance real part is positive definite", min_eig > 0.0, "min eig " + format_number(min_eig));
  }

  {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const PortLayout layout(2, 8, 2);
      const RandomNetwork net = random_passive_network(layout, 50.0, rng);
      const CompactDecomposition d = compact_decompose(net.params, net.term);
      const MimoSolution s = optimize_mimo_single_stream(d, Topology::band(8, 3), 1.0);
      worst = std::max(worst, std::abs(s.receive_power - s.certificate) / s.certificate);
    }
    check("single-stream power meets the relaxation bound", worst < 1e-6, "max rel gap " + format_number(worst));
  }

  {
    Prop2Options p;
    p.trials = 20;
    p.threads = 1;
    double worst = 0.0;
    for (const auto& r : validate_prop2(p)) {
      if (r.trial != "mean") worst = std::max(worst, r.metric_value);
    }
    check("band with optimal bandwidth matches fully connected", worst < 1e-7, "max mismatch " + format_number(worst));
  }

  {
    ExperimentConfig cfg;
    cfg.n_i = {16};
    cfg.trials = 2;
    cfg.threads = 1;
    std::ostringstream a, b;
    write_csv(a, run(cfg));
    cfg.threads = 2;
    write_csv(b, run(cfg));
    check("runs are reproducible across thread counts", a.str() == b.str(), "");
  }
  return check.all;
}

}  // namespace bdris
