#include "germlab/mollifier.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "germlab/distribution.hpp"
#include "germlab/error.hpp"

namespace germlab {

namespace {

double support_radius_of(const TestFunction& f) {
  Box s = f.support();
  double r = 0.0;
  for (int i = 0; i < f.dim(); ++i)
    r = std::max(r, std::max(std::abs(s.lo[static_cast<std::size_t>(i)]),
                             std::abs(s.hi[static_cast<std::size_t>(i)])));
  return r;
}

// int f(y) y^j dy over the support of f.
double moment(const TestFunction& f, const MultiIndex& j, const QuadratureSpec& spec) {
  return integrate_box(f.support(), spec, [&](const Vec& y) {
    double m = f.value(y);
    for (int a = 0; a < f.dim(); ++a)
      for (int rep = 0; rep < j[static_cast<std::size_t>(a)]; ++rep) m *= y[a];
    return m;
  });
}

}  // namespace

double max_vanishing_moment_defect(const MollifierFamily& m, const QuadratureSpec& spec) {
  QuadratureSpec fine = spec.refined();
  double worst = 0.0;
  int dim = m.phi_check.dim();
  for (int total = 0; total <= m.order - 1; ++total) {
    if (dim == 1) {
      worst = std::max(worst, std::abs(moment(m.phi_check, mi(total), fine)));
    } else {
      for (int k0 = 0; k0 <= total; ++k0)
        worst = std::max(worst, std::abs(moment(m.phi_check, mi(k0, total - k0), fine)));
    }
  }
  return worst;
}

double telescoping_defect(const MollifierFamily& m, int k, const Vec& z,
                          const QuadratureSpec& spec) {
  // Probe distribution: a generic smooth density.
  int dim = m.phi_hat.dim();
  SmoothFunction probe = SmoothFunction::scaled_sum(
      {{1.0, SmoothFunction::sine(1.3, 0.4)}, {0.5, SmoothFunction::polynomial({0.2, 1.0, 0.7})}});
  PairingOracle t = PairingOracle::smooth_density(probe, OpenSetDomain::whole_space(dim));
  double lhs = t.pair(rescale(m.rho, z, m.eps(k + 1)), spec) -
               t.pair(rescale(m.rho, z, m.eps(k)), spec);
  double rhs = t.pair(rescale(m.hat_conv_check, z, m.eps(k)), spec);
  return std::abs(lhs - rhs);
}

MollifierFamily build_mollifier(const TestFunction& phi, int r, const QuadratureSpec& spec) {
  if (r < 1) fail_domain("mollifier order must be at least 1");
  double mass = integral(phi, spec);
  if (std::abs(mass) < 1e-12) fail_domain("mollifier base must have nonzero integral");

  MollifierFamily m;
  m.base = phi;
  m.order = r;
  m.base_radius = support_radius_of(phi);

  for (int i = 0; i < r; ++i) m.lambdas.push_back(std::ldexp(1.0, -i - 1) / (1.0 + m.base_radius));
  for (int i = 0; i < r; ++i) {
    double c = 1.0;
    for (int k = 0; k < r; ++k) {
      if (k == i) continue;
      c *= m.lambdas[static_cast<std::size_t>(k)] /
           (m.lambdas[static_cast<std::size_t>(k)] - m.lambdas[static_cast<std::size_t>(i)]);
    }
    m.coeffs.push_back(c);
  }

  std::vector<std::pair<double, TestFunction>> parts;
  for (int i = 0; i < r; ++i)
    parts.emplace_back(m.coeffs[static_cast<std::size_t>(i)] / mass,
                       rescale(phi, zero_vec(phi.dim()), m.lambdas[static_cast<std::size_t>(i)]));
  m.phi_hat = TestFunction::linear_combination(parts);

  m.phi_check = TestFunction::linear_combination(
      {{1.0, rescale(m.phi_hat, zero_vec(phi.dim()), 0.5)},
       {-1.0, rescale(m.phi_hat, zero_vec(phi.dim()), 2.0)}});

  m.rho = convolve(rescale(m.phi_hat, zero_vec(phi.dim()), 2.0), m.phi_hat);
  m.hat_conv_check = convolve(m.phi_hat, m.phi_check);

  // Construction-time invariants; abort with the offending quantity.
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return std::string(buf);
  };
  double hat_mass = integral(m.phi_hat, spec.refined());
  if (std::abs(hat_mass - 1.0) > 1e-10)
    fail_construction("mollifier: |int phi_hat - 1| = " + fmt(std::abs(hat_mass - 1.0)));
  double hat_radius = support_radius_of(m.phi_hat);
  if (hat_radius > 0.5 + 1e-12)
    fail_construction("mollifier: phi_hat support radius " + std::to_string(hat_radius) +
                      " exceeds 1/2");
  double defect = max_vanishing_moment_defect(m, spec);
  if (defect > 1e-8)
    fail_construction("mollifier: phi_check moment defect " + fmt(defect) +
                      " exceeds 1e-8 for order " + std::to_string(r));
  double tele = telescoping_defect(m, 2, zero_vec(phi.dim()), spec);
  if (tele > 1e-8)
    fail_construction("mollifier: telescoping defect " + fmt(tele) + " exceeds 1e-8");
  return m;
}

}  // namespace germlab
