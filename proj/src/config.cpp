#include "bdris/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "bdris/topology.hpp"

namespace bdris {

std::string to_string(ScenarioKind s) {
  return s == ScenarioKind::kRayleighFarField ? "rayleigh-farfield" : "nearfield-tx";
}

std::string to_string(SystemKind s) {
  switch (s) {
    case SystemKind::kSiso: return "siso";
    case SystemKind::kMimoSingleStream: return "mimo-single-stream";
    case SystemKind::kMultiuserMiso: return "multiuser-miso";
  }
  return "?";
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  }
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError("key '" + key + "': value out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment", [](auto& c, auto&, auto& v) { c.experiment = v; }},
      {"scenario",
       [](auto& c, auto& k, auto& v) {
         if (v == "rayleigh-farfield") c.scenario = ScenarioKind::kRayleighFarField;
         else if (v == "nearfield-tx") c.scenario = ScenarioKind::kNearFieldTx;
         else throw ConfigError("key '" + k + "': unknown scenario '" + v + "'");
       }},
      {"system",
       [](auto& c, auto& k, auto& v) {
         if (v == "siso") c.system = SystemKind::kSiso;
         else if (v == "mimo-single-stream") c.system = SystemKind::kMimoSingleStream;
         else if (v == "multiuser-miso") c.system = SystemKind::kMultiuserMiso;
         else throw ConfigError("key '" + k + "': unknown system '" + v + "'");
       }},
      {"n_t", [](auto& c, auto& k, auto& v) { c.n_t = to_int(k, v); }},
      {"n_r", [](auto& c, auto& k, auto& v) { c.n_r = to_int(k, v); }},
      {"n_i",
       [](auto& c, auto& k, auto& v) {
         c.n_i.clear();
         for (const auto& s : split_list(v)) c.n_i.push_back(to_int(k, s));
       }},
      {"spacing",
       [](auto& c, auto& k, auto& v) {
         c.spacing.clear();
         for (const auto& s : split_list(v)) c.spacing.push_back(to_double(k, s));
       }},
      {"distance",
       [](auto& c, auto& k, auto& v) {
         c.distance.clear();
         for (const auto& s : split_list(v)) c.distance.push_back(to_double(k, s));
       }},
      {"models",
       [](auto& c, auto& k, auto& v) {
         c.models.clear();
         try {
           for (const auto& s : split_list(v)) c.models.push_back(parse_channel_model(s));
         } catch (const InvalidArgument& e) {
           throw ConfigError("key '" + k + "': " + e.what());
         }
       }},
      {"topology", [](auto& c, auto&, auto& v) { c.topology = v; }},
      {"p_t_dbm", [](auto& c, auto& k, auto& v) { c.p_t_dbm = to_double(k, v); }},
      {"sigma2_dbm", [](auto& c, auto& k, auto& v) { c.sigma2_dbm = to_double(k, v); }},
      {"trials", [](auto& c, auto& k, auto& v) { c.trials = to_int(k, v); }},
      {"seed",
       [](auto& c, auto& k, auto& v) {
         const long long s = to_integer(k, v);
         if (s < 0) throw ConfigError("key '" + k + "': seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"output", [](auto& c, auto&, auto& v) { c.output = v; }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = to_int(k, v); }},
      {"record_timing", [](auto& c, auto& k, auto& v) { c.record_timing = to_bool(k, v); }},
      {"frequency_hz", [](auto& c, auto& k, auto& v) { c.frequency_hz = to_double(k, v); }},
      {"dipole_length", [](auto& c, auto& k, auto& v) { c.dipole_length = to_double(k, v); }},
      {"z0", [](auto& c, auto& k, auto& v) { c.z0 = to_double(k, v); }},
      {"pathgain_it", [](auto& c, auto& k, auto& v) { c.pathgain_it = to_double(k, v); }},
      {"pathgain_ri", [](auto& c, auto& k, auto& v) { c.pathgain_ri = to_double(k, v); }},
      {"quad_points", [](auto& c, auto& k, auto& v) { c.quad_points = to_int(k, v); }},
      {"admm_rho", [](auto& c, auto& k, auto& v) { c.admm_rho = to_double(k, v); }},
      {"admm_xi", [](auto& c, auto& k, auto& v) { c.admm_xi = to_double(k, v); }},
      {"admm_max_iters", [](auto& c, auto& k, auto& v) { c.admm_max_iters = to_int(k, v); }},
      {"admm_tol_primal", [](auto& c, auto& k, auto& v) { c.admm_tol_primal = to_double(k, v); }},
      {"admm_tol_obj", [](auto& c, auto& k, auto& v) { c.admm_tol_obj = to_double(k, v); }},
      {"admm_init",
       [](auto& c, auto& k, auto& v) {
         if (v != "zero" && v != "identity") throw ConfigError("key '" + k + "': expected zero or identity");
         c.admm_init = v;
       }},
      {"rate_unit",
       [](auto& c, auto& k, auto& v) {
         if (v == "bits") c.rate_in_bits = true;
         else if (v == "nats") c.rate_in_bits = false;
         else throw ConfigError("key '" + k + "': expected bits or nats");
       }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(*this, key, trim(value));
}

std::vector<std::string> ExperimentConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

void ExperimentConfig::validate() const {
  if (n_i.empty() || spacing.empty() || distance.empty()) throw ConfigError("sweep lists must be non-empty");
  if (models.empty()) throw ConfigError("at least one model is required");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (n_t < 1 || n_r < 1) throw ConfigError("n_t and n_r must be >= 1");
  if (system == SystemKind::kSiso && (n_t != 1 || n_r != 1)) throw ConfigError("siso requires n_t = n_r = 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  for (int n : n_i) {
    if (n < 1) throw ConfigError("n_i entries must be >= 1");
  }
  for (double d : spacing) {
    if (!(d > 0.0)) throw ConfigError("spacing entries must be positive");
  }
  for (double r : distance) {
    if (!(r > 0.0)) throw ConfigError("distance entries must be positive");
  }
  if (!(frequency_hz > 0.0) || !(dipole_length > 0.0) || !(z0 > 0.0)) {
    throw ConfigError("frequency, dipole length and z0 must be positive");
  }
  if (!(pathgain_it > 0.0) || !(pathgain_ri > 0.0)) throw ConfigError("path gains must be positive");
  if (quad_points < 2) throw ConfigError("quad_points must be >= 2");
  if (!(admm_rho > 0.0) || !(admm_xi >= 0.0) || admm_max_iters < 1 || !(admm_tol_primal > 0.0) || !(admm_tol_obj >= 0.0)) {
    throw ConfigError("invalid ADMM settings");
  }
  // Topology strings are checked against every swept size.
  for (int n : n_i) {
    if (topology == "optimal") continue;
    try {
      (void)Topology::parse(topology, n);
    } catch (const InvalidArgument& e) {
      throw ConfigError("topology '" + topology + "' with n_i = " + std::to_string(n) + ": " + e.what());
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_overrides(ExperimentConfig& cfg, const std::map<std::string, std::string>& overrides) {
  for (const auto& [k, v] : overrides) cfg.set(k, v);
}

}  // namespace bdris
