#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mgb/config.hpp"

namespace mgb {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct RunReport {
  std::vector<std::filesystem::path> files;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Runs the configured experiment and writes into `out_dir`:
///   manifest.cfg  effective configuration, accepted by `mgb run`
///   summary.csv   quantity,value
///   checks.csv    check,passed,detail
/// plus the experiment's own tables. Output is byte-identical for identical
/// configurations. Library errors propagate unchanged; failed checks are
/// reported, not thrown.
RunReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace mgb
