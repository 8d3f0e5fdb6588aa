#pragma once

#include <string>
#include <vector>

#include "germlab/config.hpp"

namespace germlab {

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> outputs;  // files written
  std::string message;               // one-line outcome
};

/// Executes one experiment; writes CSV tables and a summary report into the
/// output directory (config `output.dir`, overridden by GERMLAB_OUTDIR).
/// Exit codes: 0 all checks passed, 1 a verification check failed,
/// 2 configuration error, 3 numerical non-convergence.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Canned demo scenarios: constant-circle, taylor-line, young-circle,
/// atlas-independence, nonuniqueness.
RunResult run_demo(const std::string& name, const std::string& outdir);

std::string demo_config_text(const std::string& name);

}  // namespace germlab
