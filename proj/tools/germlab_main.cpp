// germlab: experiment runner for germ coherence scans, mollifier-based
// reconstruction and chart/atlas verification.
//
// usage:
//   germlab run <config>       execute an experiment config
//   germlab validate <config>  parse and check a config, run nothing
//   germlab demo <name>        canned scenario (constant-circle, taylor-line,
//                              young-circle, atlas-independence, nonuniqueness)
//
// exit codes: 0 ok, 1 verification check failed, 2 configuration error,
//             3 numerical non-convergence.

#include <cstdlib>
#include <iostream>
#include <string>

#include "germlab/config.hpp"
#include "germlab/error.hpp"
#include "germlab/parallel.hpp"
#include "germlab/runner.hpp"
#include "germlab/version.hpp"

namespace {

int usage() {
  std::cerr << "usage: germlab run <config> | germlab validate <config> | germlab demo <name>\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace germlab;
  if (argc < 3) return usage();
  std::string cmd = argv[1];
  std::string arg = argv[2];
  configure_workers_from_env();
  try {
    if (cmd == "validate") {
      ExperimentConfig cfg = ExperimentConfig::from_file(arg);
      cfg.validate();
      std::cout << "ok: " << arg << " (kind " << cfg.kind() << ")\n";
      return 0;
    }
    if (cmd == "run") {
      ExperimentConfig cfg = ExperimentConfig::from_file(arg);
      RunResult res = run_experiment(cfg);
      if (res.exit_code != 0) std::cerr << "germlab: " << res.message << "\n";
      for (const std::string& f : res.outputs) std::cout << f << "\n";
      return res.exit_code;
    }
    if (cmd == "demo") {
      const char* env = std::getenv("GERMLAB_OUTDIR");
      std::string outdir = env && *env ? env : "out";
      // step configs carry explicit output directories below the demo root
#ifdef _WIN32
#else
      unsetenv("GERMLAB_OUTDIR");
#endif
      RunResult res = run_demo(arg, outdir);
      if (res.exit_code != 0) std::cerr << "germlab: " << res.message << "\n";
      for (const std::string& f : res.outputs) std::cout << f << "\n";
      return res.exit_code;
    }
  } catch (const Error& e) {
    std::cerr << "germlab: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::NonConvergence: return 3;
      case ErrorKind::Verification: return 1;
      default: return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "germlab: " << e.what() << "\n";
    return 2;
  }
  return usage();
}
