#include <omp.h>

#include <CLI11.hpp>
#include <iostream>

#include "qlab/config.hpp"
#include "qlab/error.hpp"
#include "qlab/experiments.hpp"
#include "qlab/kernels.hpp"

namespace {

constexpr int kConfigFailure = 2;
constexpr int kNumericalFailure = 3;

std::string joined_scenarios() {
  std::string s;
  for (const auto& n : qlab::scenario_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directional-quench pattern lab: spectra, Hopf onset, normal form and simulation"};
  std::string scenario, config_path, out_dir;
  std::vector<std::string> overrides;
  app.add_option("scenario", scenario, "One of: " + joined_scenarios())->required();
  app.add_option("--config", config_path, "INI configuration file (defaults when omitted)");
  app.add_option("--out", out_dir, "Output directory (default: scenario.output_dir)");
  app.add_option("--override", overrides, "section.key=value, repeatable")->take_all();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigFailure;
  }

  omp_set_num_threads(qlab::configured_threads());

  qlab::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? qlab::parse_config_text("") : qlab::parse_config(config_path);
    for (const auto& o : overrides) qlab::apply_override(cfg, o);
  } catch (const qlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  }
  if (out_dir.empty()) out_dir = cfg.scenario.output_dir;

  try {
    const auto manifest = qlab::run_scenario(scenario, cfg, out_dir);
    std::cout << "scenario " << scenario << " finished in " << manifest.total_seconds << " s\n";
    for (const auto& f : manifest.files) std::cout << "  " << f.path << "  " << f.bytes << " bytes\n";
    return 0;
  } catch (const qlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const qlab::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const qlab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
