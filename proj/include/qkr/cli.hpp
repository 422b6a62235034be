#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkr/types.hpp"

namespace qkr::cli {

// A module failure during a run, tagged with the module and operation.
class ComputeError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::string command;  // spectrum | deff | lengths | orbit | classical | generic | truncated | compare

  // resonant pipeline
  std::vector<double> K{2.0};
  std::vector<int> Nx{32};
  std::vector<int> Np;  // empty: Np = Nx
  int M = 1;
  double theta = 0.0;
  std::string method = "auto";
  std::vector<double> labels;  // deff sample points, default 0.05 .. 0.95
  double threshold = 0.018;
  int samples = 0;             // orbit: cells also evolved explicitly
  int times = 32;              // orbit: log-spaced times in [1e2, 1e4]

  // classical
  std::vector<int> Nc{100};
  int n_init = 1000;
  long long n_T = 100000;
  std::uint64_t seed = 0;

  // generic hbar
  double delta = 0.7071067811865476;
  int count = 4;
  int max_dim = 8000;
  int n_cut = 4000;
  int window_center = 2000;
  double min_inside = 0.999;
  int min_selected = 10;
  double diffusion = -1.0;  // D_c override; negative means measure it
  bool profile = false;

  int workers = 1;
  bool full_scale = false;
  std::string out_dir;

  nlohmann::json to_json() const;
};

// Keys absent from `j` keep their current values; unknown keys are rejected.
void apply_json(ExperimentConfig& config, const nlohmann::json& j);

// Every violated invariant; empty means valid. Never computes anything.
std::vector<std::string> validate(const ExperimentConfig& config);

struct OutputRecord {
  std::string file;  // relative to the output directory
  std::string sha256;
  std::size_t rows = 0;
};

struct RunManifest {
  nlohmann::json config;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<OutputRecord> outputs;
  nlohmann::json summary;

  nlohmann::json to_json() const;
};

// Rough peak memory of the run in bytes.
double memory_estimate(const ExperimentConfig& config);

// Validates (ConfigError listing every violation), runs the pipeline, writes
// the outputs, summary.json and manifest.json into config.out_dir.
RunManifest run(const ExperimentConfig& config);

// Command-line entry point; returns the process exit code.
int main(int argc, char** argv);

}  // namespace qkr::cli
