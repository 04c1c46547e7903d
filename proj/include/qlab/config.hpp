#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qlab/model.hpp"

namespace qlab {

struct GridConfig {
  double M = 30.0 * std::numbers::pi;
  int n_x = 1024;
  int n_y = 64;
};

struct NumericsConfig {
  double dt = 5e-3;
  double eta = 0.2;
  double relax_tol = 1e-6;
  double window = 20.0;
  double t_max = 2000.0;
  double trivial_threshold = 1e-5;
  double hopf_tol = 1e-9;
  double eig_tol = 1e-8;
  std::optional<double> stabilizer;  // unset: derived from the nonlinearity
};

// Scenario-specific values; unset speeds fall back to the scenario's own default.
struct ScenarioConfig {
  std::optional<double> c;
  std::optional<double> c_min, c_max, dc;
  double bracket_low = 1.25;  // transverse (ell = 1) crossing
  double bracket_high = 1.345;
  double bracket0_low = 1.5;  // y-independent (ell = 0) crossing
  double bracket0_high = 1.7;
  std::string seed = "checkerboard";
  double seed_amplitude = 0.03;
  std::uint64_t rng_seed = 1;
  double k_min = 0.05;
  double k_max = 0.9;
  int k_count = 18;
  int spectrum_count = 100;
  int ell_max = 2;
  int branches = 10;
  std::string output_dir = "out";
};

struct ExperimentConfig {
  ModelSpec model;
  GridConfig grid;
  NumericsConfig numerics;
  ScenarioConfig scenario;
};

// Strict INI: [model], [grid], [numerics], [scenario]; "key = value" lines,
// '#' or ';' comments. Unknown keys, duplicate keys, malformed values and
// out-of-range values raise ConfigError with the line number. Lengths accept
// a "pi" multiplier ("30pi", "10*pi", "pi").
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

// "section.key=value" or "key=value" when the key name is unambiguous.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// Effective configuration as INI text, every key present.
std::string echo_config(const ExperimentConfig& cfg);

// Parses a real number with an optional pi multiplier.
double parse_real(const std::string& raw);

}  // namespace qlab
