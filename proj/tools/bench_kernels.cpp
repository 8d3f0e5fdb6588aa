// Timing comparison of the OpenMP kernels against their serial reference:
// coherence scan rows, enhanced-check ensembles and reconstruction stages.

#include <chrono>
#include <cstdio>

#include "germlab/coherence.hpp"
#include "germlab/manifold.hpp"
#include "germlab/parallel.hpp"
#include "germlab/reconstruct.hpp"

using namespace germlab;

namespace {

template <class Fn>
double time_ms(Fn&& fn, int reps = 3) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-24s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  configure_workers_from_env();
  std::printf("workers: %d\n", worker_count());
  QuadratureSpec spec;

  OpenSetDomain dom = OpenSetDomain::box(Box::interval(-2.0, 2.0));
  Germ young = make_young(SmoothFunction::lacunary(0.7, 12), 0.7, 0.4, 12, dom);
  ScanGrid grid = make_scan_grid(Box::interval(-0.5, 0.5), dom, 3, 9, 8, 1);
  TestFunction f = TestFunction::standard_bump(1);

  {
    std::vector<CoherenceRow> serial_rows, parallel_rows;
    double ts = time_ms([&] { serial_rows = coherence_scan(young, grid, f, spec, ExecPolicy::Serial); });
    double tp = time_ms([&] { parallel_rows = coherence_scan(young, grid, f, spec, ExecPolicy::Parallel); });
    bool identical = serial_rows.size() == parallel_rows.size();
    for (std::size_t i = 0; identical && i < serial_rows.size(); ++i)
      identical = serial_rows[i].value == parallel_rows[i].value;
    report("coherence_scan", ts, tp);
    std::printf("%-24s rows %zu, serial == openmp: %s\n", "", serial_rows.size(),
                identical ? "yes" : "NO");
  }

  Germ taylor = make_taylor(SmoothFunction::sine(1.0), 2, dom);
  MollifierFamily m = build_mollifier(f, 2, spec);
  TestFunction psi = rescale(f, vec1(0.0), 0.4);
  {
    double vs = 0.0, vp = 0.0;
    double ts = time_ms([&] { vs = reconstruct_stage_reference(taylor, m, psi, 8, spec); }, 2);
    double tp = time_ms([&] { vp = reconstruct_stage(taylor, m, psi, 8, spec, ExecPolicy::Parallel); }, 2);
    report("reconstruct_stage n=8", ts, tp);
    std::printf("%-24s |serial - openmp| = %.3e\n", "", std::abs(vs - vp));
  }

  {
    CoherenceReport prior = fit_exponents(coherence_scan(taylor, grid, f, spec));
    EnhancedReport es, ep;
    double ts = time_ms(
        [&] { es = enhanced_check(taylor, grid, 2, 12, 7, prior, spec, ExecPolicy::Serial); }, 2);
    double tp = time_ms(
        [&] { ep = enhanced_check(taylor, grid, 2, 12, 7, prior, spec, ExecPolicy::Parallel); }, 2);
    report("enhanced_check", ts, tp);
    std::printf("%-24s max ratio serial %.6g openmp %.6g\n", "", es.max_ratio, ep.max_ratio);
  }
  return 0;
}
