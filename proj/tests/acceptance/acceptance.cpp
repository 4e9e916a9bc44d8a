// One PASS/FAIL line per acceptance criterion. Optional arguments select criteria by number;
// --report FILE also writes the lines to FILE.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bdris/config.hpp"
#include "bdris/harness.hpp"
#include "bdris/optim.hpp"
#include "bdris/sdp.hpp"
#include "test_support.hpp"

using namespace bdris;
using bdris::testing::rel_err;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// SDP statistics shared by the beamforming criteria and checked together at the end.
struct SdpStats {
  int programs = 0;
  double worst_gap = 0.0;
  double worst_ratio = 0.0;
  void add(const SdpSolution& s) {
    ++programs;
    worst_gap = std::max(worst_gap, s.relative_gap);
    worst_ratio = std::max(worst_ratio, eigen_ratio(s.x));
  }
};
SdpStats g_sdp;

// Coupled RIS impedance per (n_i, spacing), built once.
const CMatrix& ris_impedance(int n_i, double spacing) {
  static std::map<std::pair<int, double>, CMatrix> cache;
  auto it = cache.find({n_i, spacing});
  if (it == cache.end()) {
    const double lambda = wavelength_from_frequency(28e9);
    it = cache.emplace(std::make_pair(n_i, spacing),
                       build_ris_impedance(ris_geometry(n_i, spacing, lambda, 0.25), 50.0)).first;
  }
  return it->second;
}

// Alternates a random reciprocal passive multiport and a Rayleigh scenario with a coupled RIS.
RandomNetwork random_instance(int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(1, 4), ris(1, 16);
  const int n_t = small(rng), n_r = small(rng), n_i = ris(rng);
  const PortLayout layout(n_t, n_i, n_r);
  if (k % 2 == 0) return random_passive_network(layout, 50.0, rng);
  const double spacing = k % 4 == 1 ? 0.25 : 0.5;
  return {generate_rayleigh_scenario(layout, 4.0 * 2500.0 * 1e-8, 4.0 * 2500.0 * 1e-4, ris_impedance(n_i, spacing), rng),
          Terminations::matched(layout, 50.0)};
}

Outcome model_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const RandomNetwork net = random_instance(k, rng);
    const int n_i = net.params.layout().n_i();
    const RMatrix b = bdris::testing::random_symmetric(n_i, 0.02, rng);
    const CMatrix h1 = channel_exact(net.params, net.term, b);
    const CMatrix h2 = channel_explicit(net.params, net.term, b);
    const CompactDecomposition d = compact_decompose(net.params, net.term);
    const CMatrix h3 = channel_compact(d, make_ris_state(d, b));
    worst = std::max({worst, rel_err(h1, h2), rel_err(h1, h3), rel_err(h2, h3)});
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-10 && secs < 60.0, fmt("worst pairwise relative error %.3g (< 1e-10), %.1f s (< 60 s)", worst, secs)};
}

Outcome passive_ris_admittance() {
  // Rayleigh draws are screened by the generator; every accepted instance must satisfy the bound.
  std::mt19937_64 rng(1002);
  int accepted = 0, positive = 0;
  double smallest = INFINITY;
  for (int k = 0; k < 1000; ++k) {
    const RandomNetwork net = random_instance(k, rng);
    const PortLayout& l = net.params.layout();
    const CMatrix ybar = loaded_ris_admittance(z_to_y(net.params.z()), l, net.term);
    const double lmin = min_symmetric_eigenvalue(ybar.real());
    ++accepted;
    positive += lmin > 0.0 ? 1 : 0;
    smallest = std::min(smallest, lmin);
  }
  return {positive == accepted, fmt("%d / %d instances with positive definite real part (min eigenvalue %.3g S)",
                                    positive, accepted, smallest)};
}

Outcome model_collapse() {
  std::mt19937_64 rng(1003);
  std::map<ChannelModel, double> worst;
  for (int k = 0; k < 1000; ++k) {
    const RandomNetwork net = random_instance(k, rng);
    const RMatrix b = bdris::testing::random_symmetric(net.params.layout().n_i(), 0.02, rng);
    for (ChannelModel m : {ChannelModel::kApp1, ChannelModel::kApp2, ChannelModel::kApp3}) {
      const auto [params, term] = model_inputs(net.params, net.term, m);
      worst[m] = std::max(worst[m], rel_err(channel_exact(params, term, b), channel(m, net.params, net.term, b)));
    }
  }
  const double w = std::max({worst[ChannelModel::kApp1], worst[ChannelModel::kApp2], worst[ChannelModel::kApp3]});
  return {w < 1e-10, fmt("worst relative error app1 %.3g, app2 %.3g, app3 %.3g (< 1e-10)", worst[ChannelModel::kApp1],
                         worst[ChannelModel::kApp2], worst[ChannelModel::kApp3])};
}

Outcome relaxation_is_tight() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1004);
  const int n_i = 8;
  const PortLayout layout(2, n_i, 2);
  const Topology band = Topology::band(n_i, 3);
  const double p_t = 0.1;
  double worst_cert = 0.0, worst_res = 0.0, worst_margin = INFINITY;
  int beaten = 0;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double spacing = k % 2 ? 0.25 : 0.5;
    const NetworkParameters params =
        generate_rayleigh_scenario(layout, 4.0 * 2500.0 * 1e-8, 4.0 * 2500.0 * 1e-4, ris_impedance(n_i, spacing), rng);
    const CompactDecomposition d = compact_decompose(params, Terminations::matched(layout, 50.0));
    const MimoSolution m = optimize_mimo_single_stream(d, band, p_t);
    g_sdp.add(solve_sdp(build_sdp_reduced(d).program));
    worst_cert = std::max(worst_cert, std::abs(m.receive_power - m.certificate) / m.certificate);
    worst_res = std::max(worst_res, m.recovery_residual);

    // Random feasible designs: band susceptance at several scales with the best precoder for it.
    double best = 0.0;
    const RMatrix lf = d.l_factor();
    for (int s = 0; s < 100000; ++s) {
      const double scale = d.y0 * std::pow(10.0, -1.0 + 2.0 * (s % 5) / 4.0);
      RMatrix b = RMatrix::Zero(n_i, n_i);
      for (int i = 0; i < n_i; ++i) {
        for (int j = i; j <= std::min(n_i - 1, i + 3); ++j) b(i, j) = b(j, i) = scale * normal(rng);
      }
      const RMatrix bbar = lf * (b + d.im_ybar_ii) * lf;
      const CMatrix h = d.hbar_rt + d.hbar_ri * cayley_transform(0.5 * (bbar + bbar.transpose()), d.y0) * d.hbar_it;
      best = std::max(best, p_t * spectral_gain(h));
    }
    if (best > m.receive_power) ++beaten;
    worst_margin = std::min(worst_margin, m.receive_power / best);
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_cert < 1e-6 && worst_res < 1e-7 && beaten == 0 && secs < 300.0;
  return {ok, fmt("certificate gap %.3g (< 1e-6), recovery residual %.3g (< 1e-7), sampled designs beating "
                  "the optimum %d / 200 (min ratio %.4f), %.0f s (< 300 s)",
                  worst_cert, worst_res, beaten, worst_margin, secs)};
}

Outcome reduced_program_agrees() {
  std::mt19937_64 rng(1005);
  std::uniform_int_distribution<int> small(1, 4);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n_t = small(rng), n_r = small(rng), n_i = k % 2 ? 16 : 8;
    const PortLayout layout(n_t, n_i, n_r);
    const NetworkParameters params =
        generate_rayleigh_scenario(layout, 4.0 * 2500.0 * 1e-8, 4.0 * 2500.0 * 1e-4, ris_impedance(n_i, 0.25), rng);
    const CompactDecomposition d = compact_decompose(params, Terminations::matched(layout, 50.0));
    const BeamformingSdp full = build_sdp_full(d);
    const BeamformingSdp red = build_sdp_reduced(d);
    const SdpSolution sf = solve_sdp(full.program);
    const SdpSolution sr = solve_sdp(red.program);
    g_sdp.add(sf);
    g_sdp.add(sr);
    const double vf = full.objective_scale * sf.value;
    const double vr = red.objective_scale * sr.value;
    worst = std::max(worst, std::abs(vf - vr) / std::max(vf, vr));
  }
  return {worst < 1e-8, fmt("worst relative difference %.3g (< 1e-8)", worst)};
}

Outcome band_matches_fully() {
  Prop2Options o;
  o.trials = 500;
  o.q = 3;
  int below = 0, total = 0;
  double worst = 0.0;
  for (const auto& r : validate_prop2(o)) {
    if (r.trial == "mean") continue;
    ++total;
    below += r.metric_value < 1e-7 ? 1 : 0;
    worst = std::max(worst, r.metric_value);
  }
  o.q = 1;
  std::vector<double> narrow;
  for (const auto& r : validate_prop2(o)) {
    if (r.trial != "mean") narrow.push_back(r.metric_value);
  }
  std::sort(narrow.begin(), narrow.end());
  const double median = narrow.empty() ? 0.0 : narrow[narrow.size() / 2];
  const double frac = total ? static_cast<double>(below) / 500.0 : 0.0;
  return {frac >= 0.99 && median > 1e-3,
          fmt("q=3: %d / 500 trials below 1e-7 (>= 99%%, worst %.3g); q=1: median %.3g (> 1e-3)", below, worst, median)};
}

double mean_metric(const std::vector<CsvRow>& rows, const std::string& model, const std::string& sweep_value,
                   bool relative) {
  for (const auto& r : rows) {
    if (r.trial == "mean" && r.model == model && r.sweep_value == sweep_value) {
      return relative ? r.relative_pct : r.metric_value;
    }
  }
  return NAN;
}

Outcome unaware_far_field() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.experiment = "unaware_far_field";
  c.n_i = {64};
  c.spacing = {0.25};
  c.models = {ChannelModel::kExact, ChannelModel::kApp3};
  c.trials = 100;
  const auto rows = run(c);
  const double rel = mean_metric(rows, "app3", "64", true);
  const double secs = seconds_since(t0);
  return {std::abs(rel - 65.0) <= 10.0 && secs < 600.0,
          fmt("mean relative performance %.2f%% (65 +- 10), %.0f s (< 600 s)", rel, secs)};
}

Outcome unilateral_near_field() {
  ExperimentConfig c;
  c.experiment = "unilateral_near_field";
  c.scenario = ScenarioKind::kNearFieldTx;
  c.n_i = {64};
  c.spacing = {0.5};
  c.distance = {0.1};
  c.models = {ChannelModel::kExact, ChannelModel::kApp2};
  c.trials = 100;
  const double rel = mean_metric(run(c), "app2", "0.1", true);
  return {rel > 95.0, fmt("mean relative performance %.2f%% (> 95%%)", rel)};
}

// Aware at d = lambda/4 > aware at d = lambda/2 > unaware (app3) at d = lambda/2, on means.
bool ordering(const std::vector<CsvRow>& rows, int n_i, std::string& detail) {
  const std::string n = std::to_string(n_i);
  const double a = mean_metric(rows, "exact", n + "/0.25", false);
  const double b = mean_metric(rows, "exact", n + "/0.5", false);
  const double u = mean_metric(rows, "app3", n + "/0.5", false);
  detail += fmt(" n_i=%d: %.4g > %.4g > %.4g;", n_i, a, b, u);
  return a > b && b > u;
}

Outcome coupling_ordering() {
  bool ok = true;
  std::string detail;
  const auto base = [] {
    ExperimentConfig c;
    c.n_i = {16, 36, 64};
    c.spacing = {0.25, 0.5};
    c.models = {ChannelModel::kExact, ChannelModel::kApp3};
    return c;
  };

  ExperimentConfig siso = base();
  siso.experiment = "ordering_siso";
  siso.trials = 100;
  const auto rs = run(siso);
  detail += " siso (W):";
  for (int n : {16, 36, 64}) ok = ordering(rs, n, detail) && ok;

  ExperimentConfig mimo = base();
  mimo.experiment = "ordering_mimo";
  mimo.system = SystemKind::kMimoSingleStream;
  mimo.n_t = mimo.n_r = 4;
  mimo.trials = 100;
  const auto rm = run(mimo);
  detail += " mimo 4x4 (W):";
  for (int n : {16, 36, 64}) ok = ordering(rm, n, detail) && ok;

  ExperimentConfig mu = base();
  mu.experiment = "ordering_multiuser";
  mu.system = SystemKind::kMultiuserMiso;
  mu.n_t = mu.n_r = 4;
  mu.trials = 20;
  mu.admm_tol_obj = 1e-4;
  const auto ru = run(mu);
  detail += " multiuser 4x4, 20 trials (bits):";
  for (int n : {16, 36, 64}) ok = ordering(ru, n, detail) && ok;
  detail.pop_back();
  return {ok, detail.substr(1)};
}

Outcome sdp_solver() {
  // Scalar instance: one antenna per end and one RIS element, so u = |h_it| e^{i phi}.
  std::mt19937_64 rng(1010);
  const PortLayout layout(1, 1, 1);
  const NetworkParameters params =
      generate_rayleigh_scenario(layout, 4.0 * 2500.0 * 1e-8, 4.0 * 2500.0 * 1e-4, CMatrix::Constant(1, 1, 50.0), rng);
  const CompactDecomposition d = compact_decompose(params, Terminations::matched(layout, 50.0));
  const BeamformingSdp prog = build_sdp_full(d);
  const SdpSolution s = solve_sdp(prog.program);
  g_sdp.add(s);
  double grid = 0.0;
  const int points = 1000000;
  for (int k = 0; k < points; ++k) {
    const cplx u = std::abs(d.hbar_it(0, 0)) * std::exp(kI * (2.0 * kPi * k / points));
    grid = std::max(grid, std::norm(d.hbar_rt(0, 0) + d.hbar_ri(0, 0) * u));
  }
  const double value = prog.objective_scale * s.value;
  const double scalar_err = std::abs(value - grid) / grid;
  const bool ok = g_sdp.worst_gap < 1e-9 && g_sdp.worst_ratio < 1e-6 && scalar_err < 1e-6;
  return {ok, fmt("%d programs: worst gap %.3g (< 1e-9), worst eigenvalue ratio %.3g (< 1e-6); scalar vs "
                  "phase grid %.3g (< 1e-6)",
                  g_sdp.programs, g_sdp.worst_gap, g_sdp.worst_ratio, scalar_err)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"channel models agree (exact, explicit, compact)", model_equivalence},
      {"loaded RIS admittance has positive definite real part", passive_ris_admittance},
      {"approximations are exact on reduced inputs", model_collapse},
      {"single-stream relaxation is tight", relaxation_is_tight},
      {"reduced beamforming program matches full program", reduced_program_agrees},
      {"optimal band reproduces fully-connected channels", band_matches_fully},
      {"coupling-unaware design, far field, d = lambda/4", unaware_far_field},
      {"unilateral design, near field, r = 0.1", unilateral_near_field},
      {"receive power and sum rate ordering versus spacing", coupling_ordering},
      {"interior-point solver accuracy", sdp_solver},
  };
  std::set<int> selected;
  FILE* report = nullptr;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--report" && i + 1 < argc) {
      report = std::fopen(argv[++i], "w");
      if (!report) {
        std::fprintf(stderr, "cannot open report file %s\n", argv[i]);
        return 2;
      }
    } else {
      selected.insert(std::stoi(arg));
    }
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    const std::string line = fmt("AC%-2d %s  %s: ", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str()) +
                             o.detail + fmt(" [%.1f s]\n", seconds_since(t0));
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
    if (report) {
      std::fputs(line.c_str(), report);
      std::fflush(report);
    }
  }
  if (report) std::fclose(report);
  return failures == 0 ? 0 : 1;
}
