#ifndef BDRIS_HARNESS_HPP
#define BDRIS_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bdris/config.hpp"
#include "bdris/coupling.hpp"
#include "bdris/topology.hpp"

namespace bdris {

struct CsvRow {
  std::string experiment;
  std::string sweep_var;
  std::string sweep_value;
  std::string trial;  // index or "mean"
  std::string model;
  std::string topology;
  std::string metric_name;
  double metric_value = 0.0;
  double relative_pct = 0.0;
  double wall_ms = 0.0;
  int failures = 0;
};

const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);
std::string format_number(double v);

// Independent stream per trial: splitmix64 of (seed, trial).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

// BDRIS_THREADS, else hardware concurrency; `requested` > 0 wins.
int resolve_threads(int requested);

// Grid with nx the largest divisor of n_i not above sqrt(n_i).
DipoleGeometry ris_geometry(int n_i, double spacing_wavelengths, double wavelength, double length_wavelengths);

// "optimal" resolves to the band matching the fully-connected channel-shaping capability.
Topology resolve_topology(const std::string& spec, int n_t, int n_r, int n_i);

// One row per (sweep point, trial, model) followed by per-model mean rows.
std::vector<CsvRow> run(const ExperimentConfig& cfg);

struct Prop2Options {
  int n_t = 2;
  int n_r = 2;
  int n_i = 8;
  int trials = 100;
  std::uint64_t seed = 1;
  int q = -1;                     // band half-width; < 0 uses optimal_bandwidth
  double spacing = 0.5;           // wavelengths, for the coupled Z_II
  double frequency_hz = 28e9;
  double z0 = 50.0;
  int threads = 0;
};

// Relative channel mismatch ||H_band - H_fully||_F / ||H_fully||_F per trial, where the band
// susceptance is fitted to reproduce the action of a random fully-connected one.
std::vector<CsvRow> validate_prop2(const Prop2Options& opts);

// Quick invariant checks on small instances; prints one PASS/FAIL line each.
bool selftest(std::ostream& out);

}  // namespace bdris

#endif  // BDRIS_HARNESS_HPP
