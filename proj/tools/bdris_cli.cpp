#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bdris/config.hpp"
#include "bdris/harness.hpp"

namespace {

// Turns leftover "--key value" / "--key=value" tokens into config overrides.
std::map<std::string, std::string> collect_overrides(const std::vector<std::string>& extras) {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string tok = extras[i];
    if (tok.rfind("--", 0) != 0) throw bdris::ConfigError("unexpected argument '" + tok + "'");
    tok = tok.substr(2);
    std::string value;
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      value = tok.substr(eq + 1);
      tok = tok.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw bdris::ConfigError("missing value for --" + tok);
      value = extras[++i];
    }
    std::replace(tok.begin(), tok.end(), '-', '_');
    out[tok] = value;
  }
  return out;
}

void emit(const std::vector<bdris::CsvRow>& rows, const std::string& path) {
  if (path.empty() || path == "-") {
    bdris::write_csv(std::cout, rows);
    return;
  }
  std::ofstream f(path);
  if (!f) throw bdris::ConfigError("cannot write '" + path + "'");
  bdris::write_csv(f, rows);
  std::cerr << "wrote " << rows.size() << " rows to " << path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BD-RIS channel modelling and optimization experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Monte-Carlo experiment from a config file");
  std::string config_path;
  run->add_option("--config", config_path, "key = value config file");
  run->allow_extras();
  run->footer("Any config key can be overridden with --key value.");

  auto* prop2 = app.add_subcommand("validate-prop2", "band versus fully connected channel mismatch");
  bdris::Prop2Options p2;
  std::string p2_output;
  prop2->add_option("--n-t", p2.n_t, "transmit antennas")->capture_default_str();
  prop2->add_option("--n-r", p2.n_r, "receive antennas")->capture_default_str();
  prop2->add_option("--n-i", p2.n_i, "RIS elements")->capture_default_str();
  prop2->add_option("--trials", p2.trials)->capture_default_str();
  prop2->add_option("--seed", p2.seed)->capture_default_str();
  prop2->add_option("--q", p2.q, "band half-width (default: optimal)");
  prop2->add_option("--spacing", p2.spacing, "element spacing in wavelengths")->capture_default_str();
  prop2->add_option("--threads", p2.threads);
  prop2->add_option("--output", p2_output, "CSV path (default stdout)");

  auto* self = app.add_subcommand("selftest", "quick invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      bdris::ExperimentConfig cfg = config_path.empty() ? bdris::ExperimentConfig{} : bdris::load_config(config_path);
      bdris::apply_overrides(cfg, collect_overrides(run->remaining()));
      emit(bdris::run(cfg), cfg.output);
    } else if (prop2->parsed()) {
      emit(bdris::validate_prop2(p2), p2_output);
    } else if (self->parsed()) {
      return bdris::selftest(std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
