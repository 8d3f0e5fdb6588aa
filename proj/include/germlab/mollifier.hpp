#pragma once

#include "germlab/testfn.hpp"

namespace germlab {

/// Order-r moment-corrected mollifier system built from a base test function
/// phi with nonzero integral:
///   phi_hat   = (1/int phi) sum_{i<r} c_i phi^{lambda_i},
///               lambda_i = 2^{-i-1}/(1+R_phi), c_i = prod_{k!=i} lambda_k/(lambda_k - lambda_i)
///   phi_check = phi_hat^{1/2} - phi_hat^{2}        (superscripts are scales)
///   rho       = phi_hat^{2} * phi_hat              (smoothing kernel)
/// phi_hat integrates to one and is supported in B(0, 1/2); phi_check has
/// vanishing moments through order r-1, which is the source of the eps^r gain
/// in the dyadic telescoping rho^{eps_{k+1}} - rho^{eps_k} = phi_hat^{eps_k} * phi_check^{eps_k}.
struct MollifierFamily {
  TestFunction base;
  int order = 1;
  double base_radius = 1.0;
  std::vector<double> lambdas;  // lambda_i
  std::vector<double> coeffs;   // c_i
  TestFunction phi_hat;
  TestFunction phi_check;
  TestFunction rho;                  // convolution kernel, support radius 3/2
  TestFunction hat_conv_check;       // phi_hat * phi_check, support radius 3/2

  double eps(int k) const { return std::ldexp(1.0, -k); }
  double rho_support_radius() const { return rho.support().hi[0]; }
};

/// Builds the family and verifies its invariants (unit mass, support in
/// B(0,1/2), vanishing moments of phi_check, telescoping on a probe pairing).
/// Construction aborts with the offending check on failure.
MollifierFamily build_mollifier(const TestFunction& phi, int r, const QuadratureSpec& spec);

/// max_{|j| <= r-1} |int phi_check(y) y^j dy|, by quadrature at the refined spec.
double max_vanishing_moment_defect(const MollifierFamily& m, const QuadratureSpec& spec);

/// |pair(T, rho^{eps_{k+1}}_z) - pair(T, rho^{eps_k}_z) - pair(T, (phi_hat * phi_check)^{eps_k}_z)|
/// for a probe density, the telescoping identity as pairings.
double telescoping_defect(const MollifierFamily& m, int k, const Vec& z,
                          const QuadratureSpec& spec);

}  // namespace germlab
