#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace genprior::harness {

struct InvalidSpec : std::invalid_argument {
  explicit InvalidSpec(const std::string& what)
      : std::invalid_argument(what) {}
};

struct IoFailure : std::runtime_error {
  explicit IoFailure(const std::string& what) : std::runtime_error(what) {}
};

// A seeded experiment: kind plus a flat key=value parameter grid.  Every
// kind has documented defaults matching the calibration scales.
struct ExperimentSpec {
  std::string kind;  // wdc_sweep | rric_sweep | concentration_sweep |
                     // landscape_grid | recovery_phase | region_count | g_table
  std::string out_dir = ".";
  std::uint64_t master_seed = 1;
  int trials = 20;
  int workers = 0;  // 0: GENPRIOR_WORKERS env var, else hardware concurrency
  std::map<std::string, std::string> params;

  // typed parameter access with defaults
  int get_int(const std::string& key, int def) const;
  double get_double(const std::string& key, double def) const;
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& def) const;
  std::string get_str(const std::string& key, const std::string& def) const;
};

// key=value lines; '#' starts a comment
ExperimentSpec parse_spec_file(const std::string& path);
ExperimentSpec parse_spec_lines(const std::vector<std::string>& lines);

// Per-trial seed: stable hash of (master_seed, cell index, trial index).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell,
                          std::uint64_t trial);

struct RunResult {
  std::vector<std::string> files;  // emitted artifacts
};

// Runs the experiment, emits one CSV per kind (fixed column schema) plus a
// manifest.json recording the spec.  Identical spec + seed => identical
// bytes.
RunResult run(const ExperimentSpec& spec);

// Aggregates a recovery_phase run into success rows
// (k, m, d, success_rate, median_rel_err, median_iters).
RunResult phase_table(const ExperimentSpec& spec);

}  // namespace genprior::harness
