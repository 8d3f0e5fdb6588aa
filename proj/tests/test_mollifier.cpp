#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "germlab/distribution.hpp"
#include "germlab/mollifier.hpp"

using namespace germlab;

namespace {
const QuadratureSpec kSpec;

double moment_oracle(const TestFunction& f, int power) {
  // doubled-resolution quadrature of f(y) y^power over the support
  return integrate_box(f.support(), kSpec.refined(), [&](const Vec& y) {
    double v = f.value(y);
    for (int i = 0; i < power; ++i) v *= y[0];
    return v;
  });
}
}  // namespace

TEST_CASE("order 1: single corrected term with c0 = 1") {
  TestFunction phi = TestFunction::standard_bump(1);
  MollifierFamily m = build_mollifier(phi, 1, kSpec);
  CHECK(m.coeffs.size() == 1);
  CHECK(m.coeffs[0] == doctest::Approx(1.0));
  CHECK(m.lambdas[0] == doctest::Approx(0.25));  // 2^-1 / (1 + R), R = 1
  // phi_hat = phi^{1/4} / int(phi)
  double mass = integral(phi, kSpec);
  TestFunction expected = rescale(phi, vec1(0.0), 0.25).scaled_by(1.0 / mass);
  for (double y : {-0.2, 0.0, 0.13, 0.24}) {
    CHECK(m.phi_hat.value(vec1(y)) == doctest::Approx(expected.value(vec1(y))).epsilon(1e-14));
  }
}

TEST_CASE("phi_hat integrates to one and sits inside B(0, 1/2)") {
  TestFunction phi = TestFunction::standard_bump(1);
  for (int r : {1, 2, 3}) {
    MollifierFamily m = build_mollifier(phi, r, kSpec);
    CHECK(std::abs(integral(m.phi_hat, kSpec) - 1.0) <= 1e-10);
    CHECK(m.phi_hat.value(vec1(0.5 + 1e-3)) == 0.0);
    CHECK(m.phi_hat.value(vec1(-0.5 - 1e-3)) == 0.0);
  }
}

TEST_CASE("phi_check moments vanish through order r-1") {
  TestFunction phi = TestFunction::standard_bump(1);
  for (int r : {1, 2, 3}) {
    MollifierFamily m = build_mollifier(phi, r, kSpec);
    for (int j = 0; j <= r - 1; ++j) {
      CHECK(std::abs(moment_oracle(m.phi_check, j)) <= 1e-8);
    }
    CHECK(max_vanishing_moment_defect(m, kSpec) <= 1e-8);
  }
}

TEST_CASE("lagrange coefficients kill low moments of phi_hat as well") {
  TestFunction phi = TestFunction::standard_bump(1);
  MollifierFamily m = build_mollifier(phi, 3, kSpec);
  // sum_i c_i lambda_i^m = delta_{m,0} makes int phi_hat y^m = 0 for 1 <= m <= r-1
  CHECK(moment_oracle(m.phi_hat, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(moment_oracle(m.phi_hat, 2) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("an asymmetric base with nonzero integral still builds") {
  TestFunction phi = TestFunction::poly_bump(1, 1.0, {0.6, 0.0}, {0.3, 0.0});
  MollifierFamily m = build_mollifier(phi, 2, kSpec);
  CHECK(std::abs(integral(m.phi_hat, kSpec) - 1.0) <= 1e-10);
  CHECK(std::abs(moment_oracle(m.phi_check, 0)) <= 1e-8);
  CHECK(std::abs(moment_oracle(m.phi_check, 1)) <= 1e-8);
}

TEST_CASE("zero-integral base is a domain error") {
  TestFunction odd = TestFunction::poly_bump(1, 0.0, {1.0, 0.0}, {0.0, 0.0});
  CHECK_THROWS_AS(build_mollifier(odd, 2, kSpec), Error);
  CHECK_THROWS_AS(build_mollifier(TestFunction::standard_bump(1), 0, kSpec), Error);
}

TEST_CASE("rho support stays inside B(0, 3/2) and telescoping holds as pairings") {
  TestFunction phi = TestFunction::standard_bump(1);
  MollifierFamily m = build_mollifier(phi, 2, kSpec);
  // phi_hat actually lives in B(0, 0.25) for the standard bump, so rho's
  // support radius is 0.75, well inside the 3/2 bound
  CHECK(m.rho_support_radius() <= 1.5);
  CHECK(m.rho_support_radius() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.rho.value(vec1(0.751)) == 0.0);
  for (int k : {2, 4, 6}) {
    for (double z : {0.0, 0.4}) {
      CHECK(telescoping_defect(m, k, vec1(z), kSpec) <= 1e-8);
    }
  }
}

TEST_CASE("rho integrates to one (convolution of unit masses)") {
  TestFunction phi = TestFunction::standard_bump(1);
  MollifierFamily m = build_mollifier(phi, 2, kSpec);
  CHECK(integral(m.rho, kSpec) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mollified pairings converge to the density value") {
  // T(rho^eps_z) -> u(z) for a smooth density u as eps -> 0
  TestFunction phi = TestFunction::standard_bump(1);
  MollifierFamily m = build_mollifier(phi, 2, kSpec);
  SmoothFunction u = SmoothFunction::sine(1.0, 0.9);
  PairingOracle t = PairingOracle::smooth_density(u, OpenSetDomain::whole_space(1));
  double z = 0.37;
  double prev = 1e9;
  for (int k : {3, 5, 7, 9}) {
    double v = t.pair(rescale(m.rho, vec1(z), m.eps(k)), kSpec);
    double err = std::abs(v - u.value(vec1(z)));
    CHECK(err < prev + 1e-12);
    prev = err;
  }
  CHECK(prev <= 1e-6);
}
