#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qlab/config.hpp"

namespace qlab {

struct ManifestFile {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string scenario;
  std::string config_sha256;
  std::string version;
  std::uint64_t rng_seed = 0;
  std::vector<ManifestFile> files;
  std::vector<StageTiming> timings;
  double total_seconds = 0.0;

  std::string to_json() const;
};

const std::vector<std::string>& scenario_names();

// Runs a canned scenario, writing its CSVs, SVG renders, the effective
// config and manifest.json under out_dir/<scenario>.
RunManifest run_scenario(const std::string& name, const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Version string recorded in manifests.
std::string artifact_version();

}  // namespace qlab
