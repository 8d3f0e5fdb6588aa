#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "germlab/germ.hpp"
#include "germlab/parallel.hpp"

namespace germlab {

/// Deterministic scan design over a compact box K: low-discrepancy base
/// points paired at dyadically stratified distances (so both regimes of the
/// two-scale bound are populated at every lambda), and dyadic scales
/// lambda = 2^-m intersected with (0, D_K/4] when an ambient open set is
/// given.
struct ScanGrid {
  Box compact;
  std::optional<OpenSetDomain> ambient;
  int m_min = 3;
  int m_max = 10;
  int pairs_per_stratum = 12;
  std::uint64_t seed = 1;

  std::vector<std::pair<Vec, Vec>> pairs;
  std::vector<double> lambdas;
  std::vector<Vec> points;  // homogeneity points: box centre + low-discrepancy fill

  std::size_t n_pairs() const { return pairs.size(); }
};

ScanGrid make_scan_grid(const Box& compact, std::optional<OpenSetDomain> ambient, int m_min,
                        int m_max, int pairs_per_stratum, std::uint64_t seed);

struct CoherenceRow {
  Vec p, q;
  double lambda = 0.0;
  double value = 0.0;
  bool near = false;  // |p-q| <= lambda (ties assigned to NEAR)
  bool clipped = false;
};

/// One row per (pair, lambda): |(F_p - F_q)(f^lambda_q)|. Requires a scan
/// test function with nonzero integral. Rows are computed independently and
/// merged in index order, so results are identical for any worker count.
std::vector<CoherenceRow> coherence_scan(const Germ& germ, const ScanGrid& grid,
                                         const TestFunction& f, const QuadratureSpec& spec,
                                         ExecPolicy policy = ExecPolicy::Parallel);

struct CoherenceReport {
  bool exact = false;       // every value below the numerical-zero cut
  double gamma_hat = 0.0;   // NEAR envelope exponent
  double alpha_hat = 0.0;   // FAR lambda exponent
  double gamma_far = 0.0;   // FAR lambda + distance exponents
  double c_hat = 0.0;       // exp of the larger fitted intercept
  double near_rms = 0.0;
  double far_rms = 0.0;
  std::size_t near_rows = 0, far_rows = 0;
  const char* split_rule = "NEAR iff |p-q| <= lambda";
};

/// Log-log least squares on the scan table, regime by regime.
/// NEAR fits log v against (log lambda, log |p-q|); the envelope exponent
/// gamma is the value of the fitted form on the regime boundary r = lambda.
/// FAR fits the same two-parameter form on per-(lambda, distance-octave)
/// envelope cells; its lambda exponent estimates alpha.
CoherenceReport fit_exponents(const std::vector<CoherenceRow>& rows);

struct HomogeneityRow {
  Vec p;
  double lambda = 0.0;
  double value = 0.0;
};

struct HomogeneityReport {
  bool exact = false;
  double beta_hat = 0.0;
  double c_hat = 0.0;
  double rms = 0.0;
  std::vector<HomogeneityRow> rows;
};

/// |F_p(f^lambda_p)| over the grid points, with a per-lambda envelope
/// log-log fit for the local homogeneity exponent.
HomogeneityReport homogeneity_scan(const Germ& germ, const ScanGrid& grid, const TestFunction& f,
                                   const QuadratureSpec& spec,
                                   ExecPolicy policy = ExecPolicy::Parallel);

struct EnhancedRow {
  Vec p, q;
  double lambda = 0.0;
  int psi_id = 0;
  double ratio = 0.0;
};

struct EnhancedReport {
  double max_ratio = 0.0;
  EnhancedRow witness;
  std::vector<EnhancedRow> rows;
};

/// Uniformity check over a seeded ensemble of test functions in D(B(0,1)):
/// max over the ensemble and the grid of
///   |(F_p - F_q)(psi^lambda_q)| / (||psi||_{C^r} lambda^alpha (|p-q|+lambda)^{gamma-alpha}),
/// with (gamma, alpha) taken from a prior coherence report. Requires
/// r > -alpha_hat.
EnhancedReport enhanced_check(const Germ& germ, const ScanGrid& grid, int r, int n_psi,
                              std::uint64_t psi_seed, const CoherenceReport& prior,
                              const QuadratureSpec& spec,
                              ExecPolicy policy = ExecPolicy::Parallel);

/// Seeded ensemble member: (c0 + c1 y + c2 y^2) x standard bump, coefficients
/// uniform in [-1, 1]; supported in B(0,1) by construction.
TestFunction random_unit_test_function(int dim, std::uint64_t seed, int index);

/// Recentering identity: u^lambda_q = utilde^{lambda1}_a with
///   utilde = u^{lambda2}_w, lambda1 = |q-a| + lambda, lambda2 = lambda/lambda1,
///   w = (q-a)/(|q-a| + lambda).
/// Returns (utilde, lambda1); utilde lies in D(B(0,1)) since |w| + lambda2 = 1.
std::pair<TestFunction, double> recenter(const TestFunction& u, const Vec& q, const Vec& a,
                                         double lambda);

/// Same evaluator on a smaller open set V (V must lie inside the germ's
/// domain); scans on compacts of V then use the tighter D_K cap.
Germ restrict(const Germ& germ, const OpenSetDomain& v);

}  // namespace germlab
