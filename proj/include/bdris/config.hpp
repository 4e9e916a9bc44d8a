#ifndef BDRIS_CONFIG_HPP
#define BDRIS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bdris/channels.hpp"

namespace bdris {

enum class ScenarioKind { kRayleighFarField, kNearFieldTx };
enum class SystemKind { kSiso, kMimoSingleStream, kMultiuserMiso };

std::string to_string(ScenarioKind s);
std::string to_string(SystemKind s);

// One Monte-Carlo study. Sweep points are the product of n_i, spacing and distance;
// lengths are in wavelengths, powers in dBm.
struct ExperimentConfig {
  std::string experiment = "experiment";
  ScenarioKind scenario = ScenarioKind::kRayleighFarField;
  SystemKind system = SystemKind::kSiso;
  int n_t = 1;
  int n_r = 1;
  std::vector<int> n_i = {64};
  std::vector<double> spacing = {0.5};
  std::vector<double> distance = {1.0};  // near-field transmitter height r
  std::vector<ChannelModel> models = {ChannelModel::kExact, ChannelModel::kApp2, ChannelModel::kApp3};
  std::string topology = "fully";  // single | group:G | tridiagonal | band:q | optimal | fully
  double p_t_dbm = 20.0;
  double sigma2_dbm = -80.0;
  int trials = 100;
  std::uint64_t seed = 1;
  std::string output;  // empty: stdout
  int threads = 0;     // 0: BDRIS_THREADS or hardware concurrency
  bool record_timing = false;

  double frequency_hz = 28e9;
  double dipole_length = 0.25;
  double z0 = 50.0;
  double pathgain_it = 4.0 * 50.0 * 50.0 * 1e-8;
  double pathgain_ri = 4.0 * 50.0 * 50.0 * 1e-4;
  int quad_points = 32;

  // multiuser only
  double admm_rho = 1.0;
  double admm_xi = 0.1;
  int admm_max_iters = 500;
  double admm_tol_primal = 1e-5;
  double admm_tol_obj = 1e-5;
  // identity: start from the susceptance with theta_bar = I (restricted to the mask);
  // zero: open-circuit start, which tends to stall in poor local optima.
  std::string admm_init = "identity";
  bool rate_in_bits = true;

  void validate() const;
  // Apply one `key = value` assignment; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  static std::vector<std::string> keys();
};

// Parse `key = value` lines with `#` comments on top of the defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void apply_overrides(ExperimentConfig& cfg, const std::map<std::string, std::string>& overrides);

double dbm_to_watts(double dbm);

}  // namespace bdris

#endif  // BDRIS_CONFIG_HPP
