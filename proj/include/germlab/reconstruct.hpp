#pragma once

#include <functional>
#include <vector>

#include "germlab/coherence.hpp"
#include "germlab/germ.hpp"
#include "germlab/mollifier.hpp"

namespace germlab {

struct ReconstructDiagnostics {
  std::vector<int> stages;      // dyadic indices n
  std::vector<double> values;   // R_n
  bool converged = false;
  int n_star = 0;               // accepted stage
  double increment_ratio = 0.0; // geometric-rate estimate of |R_{n+1} - R_n|
  double richardson = 0.0;      // extrapolated limit, diagnostic only
};

struct ReconstructResult {
  double value = 0.0;
  ReconstructDiagnostics diag;
};

inline constexpr double kReconstructTol = 1e-7;
inline constexpr int kReconstructNMin = 2;
inline constexpr int kReconstructNMax = 12;

/// Stage value R_n F(psi) = int F_z(rho^{eps_n}_z) psi(z) dz, with z-nodes
/// inherited from psi's support panels.
double reconstruct_stage(const Germ& germ, const MollifierFamily& m, const Integrand& psi, int n,
                         const QuadratureSpec& spec, ExecPolicy policy);

/// Straightforward serial evaluation of the same stage (reference
/// implementation kept for testing the parallel kernel).
double reconstruct_stage_reference(const Germ& germ, const MollifierFamily& m,
                                   const Integrand& psi, int n, const QuadratureSpec& spec);

/// Local reconstruction: iterate R_n over eps_n = 2^{-n} until the increment
/// falls below tol or n_max is reached. The accepted value is the first
/// iterate whose successor moved less than tol (plain last-iterate;
/// Richardson extrapolation is reported as a diagnostic only). Requires
/// supp(psi) inside the germ's domain with margin for the kernel support;
/// the start stage adapts to that margin.
ReconstructResult reconstruct_local(const Germ& germ, const MollifierFamily& m,
                                    const Integrand& psi, int n_max, const QuadratureSpec& spec,
                                    ExecPolicy policy = ExecPolicy::Parallel,
                                    double tol = kReconstructTol);

/// A reconstruction presented as a pairing evaluator.
class LocalReconstruction {
 public:
  LocalReconstruction(Germ germ, MollifierFamily m, int n_max, QuadratureSpec spec,
                      ExecPolicy policy = ExecPolicy::Parallel)
      : germ_(std::move(germ)), m_(std::move(m)), n_max_(n_max), spec_(spec), policy_(policy) {}

  double operator()(const Integrand& psi) const {
    return reconstruct_local(germ_, m_, psi, n_max_, spec_, policy_).value;
  }
  const Germ& germ() const { return germ_; }
  const MollifierFamily& mollifier() const { return m_; }

 private:
  Germ germ_;
  MollifierFamily m_;
  int n_max_;
  QuadratureSpec spec_;
  ExecPolicy policy_;
};

/// Default mollifier order r = max(1, ceil(-alpha_hat) + 1) from a fitted
/// coherence report.
int mollifier_order_for(const CoherenceReport& report);

struct ResidualRow {
  Vec p;
  double lambda = 0.0;
  double residual = 0.0;
};

enum class ResidualLaw { PowerLaw, LogEnvelope };

struct ResidualReport {
  std::vector<ResidualRow> rows;
  double slope = 0.0;          // log-log envelope slope (PowerLaw)
  double log_coeff = 0.0;      // C in  residual ~ A + C (1 + |log lambda|)  (LogEnvelope)
  double log_intercept = 0.0;  // A
  double max_residual = 0.0;
};

/// |(RF - F_p)(h^lambda_p)| over the grid, with the fit selected by `law`:
/// a log-log slope for power-law decay/growth, or a linear fit against
/// 1 + |log lambda| for the borderline exponent.
ResidualReport residual_scan(const Germ& germ, const std::function<double(const Integrand&)>& rf,
                             const ScanGrid& grid, const TestFunction& h,
                             const QuadratureSpec& spec, ResidualLaw law = ResidualLaw::PowerLaw,
                             ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace germlab
