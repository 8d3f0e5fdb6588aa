#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "germlab/germ.hpp"
#include "germlab/rng.hpp"

using namespace germlab;

namespace {
const QuadratureSpec kSpec;
const OpenSetDomain kLine = OpenSetDomain::whole_space(1);

TestFunction symmetric_unit_bump(double center, double scale) {
  TestFunction b = TestFunction::standard_bump(1);
  double mass = integral(b, kSpec);
  return rescale(b, vec1(center), scale).scaled_by(1.0 / mass);
}
}  // namespace

TEST_CASE("constant germ: difference pairings vanish identically") {
  PairingOracle t = PairingOracle::smooth_density(SmoothFunction::sine(1.2, 0.5), kLine);
  Germ f = make_constant(t);
  TestFunction probe = rescale(TestFunction::standard_bump(1), vec1(0.2), 0.1);
  for (int i = 0; i < 20; ++i) {
    Vec p = vec1(uniform_real(1, 2 * i, -1.0, 1.0));
    Vec q = vec1(uniform_real(1, 2 * i + 1, -1.0, 1.0));
    CHECK(germ_pair(f, p, probe, kSpec) == germ_pair(f, q, probe, kSpec));
  }
}

TEST_CASE("germ evaluation outside the base domain is a domain error") {
  OpenSetDomain dom = OpenSetDomain::box(Box::interval(-1.0, 1.0));
  Germ f = make_constant(PairingOracle::smooth_density(SmoothFunction::constant(1.0), dom));
  TestFunction probe = rescale(TestFunction::standard_bump(1), vec1(0.0), 0.1);
  CHECK_THROWS_AS(germ_pair(f, vec1(2.0), probe, kSpec), Error);
}

TEST_CASE("taylor germ of y^2 at k=1: closed-form difference pairing") {
  // F_x(y) = x^2 + 2x(y - x) = 2xy - x^2; paired with a symmetric unit-mass
  // bump at z the difference gives exactly -(x - z)^2, independent of lambda
  Germ f = make_taylor(SmoothFunction::polynomial({0.0, 0.0, 1.0}), 1, kLine);
  for (int i = 0; i < 12; ++i) {
    double x = uniform_real(2, 3 * i, -1.0, 1.0);
    double z = uniform_real(2, 3 * i + 1, -1.0, 1.0);
    double lam = std::exp(uniform_real(2, 3 * i + 2, std::log(0.01), 0.0));
    TestFunction psi = symmetric_unit_bump(z, lam);
    double diff = germ_pair(f, vec1(x), psi, kSpec) - germ_pair(f, vec1(z), psi, kSpec);
    CHECK(diff == doctest::Approx(-(x - z) * (x - z)).epsilon(1e-9));
  }
}

TEST_CASE("taylor germ at k=0 pairs constants with the integral") {
  SmoothFunction g = SmoothFunction::sine(1.0, 0.4);
  Germ f = make_taylor(g, 0, kLine);
  TestFunction psi = rescale(TestFunction::poly_bump(1, 0.8, {0.4, 0.0}, {0.1, 0.0}), vec1(0.3), 0.2);
  double mass = integral(psi, kSpec);
  double x = 0.7, z = -0.2;
  double diff = germ_pair(f, vec1(x), psi, kSpec) - germ_pair(f, vec1(z), psi, kSpec);
  CHECK(diff == doctest::Approx((g.value(vec1(x)) - g.value(vec1(z))) * mass).epsilon(1e-10));
}

TEST_CASE("taylor germ value: worked example at p = 0.5") {
  Germ f = make_taylor(SmoothFunction::polynomial({0.0, 0.0, 1.0}), 1, kLine);
  TestFunction psi = symmetric_unit_bump(0.5, 0.1);
  // F_{0.5}(y) = 2*0.5*y - 0.25; the odd moment vanishes for a symmetric bump
  CHECK(germ_pair(f, vec1(0.5), psi, kSpec) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("taylor germ reproduces polynomials of degree <= k exactly") {
  SmoothFunction g = SmoothFunction::polynomial({0.3, -1.2, 0.8});
  Germ f = make_taylor(g, 2, kLine);
  for (int i = 0; i < 10; ++i) {
    double x = uniform_real(4, 2 * i, -1.0, 1.0);
    double z = uniform_real(4, 2 * i + 1, -1.0, 1.0);
    TestFunction psi = rescale(TestFunction::poly_bump(1, 1.0, {0.7, 0.0}, {0.0, 0.0}),
                               vec1(0.5 * (x + z)), 0.3);
    double diff = germ_pair(f, vec1(x), psi, kSpec) - germ_pair(f, vec1(z), psi, kSpec);
    CHECK(std::abs(diff) <= 1e-12);
  }
}

TEST_CASE("taylor germ requires enough analytic derivatives") {
  SmoothFunction g = SmoothFunction::custom([](const Vec& y) { return y[0]; }, "opaque");
  CHECK_THROWS_AS(make_taylor(g, 1, kLine), Error);
}

TEST_CASE("young germ: difference pairing factorizes exactly") {
  OpenSetDomain dom = OpenSetDomain::box(Box::interval(-4.0, 4.0));
  SmoothFunction g = SmoothFunction::lacunary(0.7, 12);
  Germ f = make_young(g, 0.7, 0.4, 12, dom);
  PairingOracle xi = PairingOracle::lacunary_series(0.4, 12, true, dom);
  for (int i = 0; i < 8; ++i) {
    double x = uniform_real(6, 3 * i, -1.0, 1.0);
    double z = uniform_real(6, 3 * i + 1, -1.0, 1.0);
    double lam = std::exp(uniform_real(6, 3 * i + 2, std::log(0.02), std::log(0.25)));
    TestFunction psi = rescale(TestFunction::standard_bump(1), vec1(z), lam);
    double diff = germ_pair(f, vec1(x), psi, kSpec) - germ_pair(f, vec1(z), psi, kSpec);
    double expected = (g.value(vec1(x)) - g.value(vec1(z))) * xi.pair(psi, kSpec);
    CHECK(diff == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("young germ with constant g reduces to a constant germ") {
  OpenSetDomain dom = OpenSetDomain::box(Box::interval(-4.0, 4.0));
  Germ f = make_young(SmoothFunction::constant(0.8), 0.7, 0.4, 12, dom);
  TestFunction psi = rescale(TestFunction::standard_bump(1), vec1(0.3), 0.05);
  CHECK(germ_pair(f, vec1(0.1), psi, kSpec) - germ_pair(f, vec1(0.9), psi, kSpec) == 0.0);
}

TEST_CASE("young germ is linear in g") {
  OpenSetDomain dom = OpenSetDomain::box(Box::interval(-4.0, 4.0));
  SmoothFunction g = SmoothFunction::lacunary(0.7, 12);
  Germ f1 = make_young(g, 0.7, 0.4, 12, dom);
  Germ f3 = make_young(SmoothFunction::scaled_sum({{3.0, g}}), 0.7, 0.4, 12, dom);
  TestFunction psi = rescale(TestFunction::standard_bump(1), vec1(0.4), 0.1);
  double d1 = germ_pair(f1, vec1(0.2), psi, kSpec) - germ_pair(f1, vec1(0.5), psi, kSpec);
  double d3 = germ_pair(f3, vec1(0.2), psi, kSpec) - germ_pair(f3, vec1(0.5), psi, kSpec);
  CHECK(d3 == doctest::Approx(3.0 * d1).epsilon(1e-13));
}

TEST_CASE("young germ parameter validation") {
  OpenSetDomain dom = OpenSetDomain::box(Box::interval(-4.0, 4.0));
  SmoothFunction g = SmoothFunction::lacunary(0.7, 12);
  CHECK_THROWS_AS(make_young(g, 1.5, 0.4, 12, dom), Error);
  CHECK_THROWS_AS(make_young(g, 0.7, 0.0, 12, dom), Error);
}

TEST_CASE("germ evaluators are deterministic") {
  OpenSetDomain dom = OpenSetDomain::box(Box::interval(-4.0, 4.0));
  Germ f = make_young(SmoothFunction::lacunary(0.7, 12), 0.7, 0.4, 12, dom);
  TestFunction psi = rescale(TestFunction::standard_bump(1), vec1(-0.3), 0.07);
  double a = germ_pair(f, vec1(0.25), psi, kSpec);
  double b = germ_pair(f, vec1(0.25), psi, kSpec);
  CHECK(a == b);
}

TEST_CASE("germ linear combinations pair additively") {
  Germ f1 = make_taylor(SmoothFunction::sine(1.0), 1, kLine);
  Germ f2 = make_constant(PairingOracle::smooth_density(SmoothFunction::constant(2.0), kLine));
  Germ sum = germ_linear_combination({{1.0, f1}, {0.5, f2}});
  TestFunction psi = rescale(TestFunction::standard_bump(1), vec1(0.1), 0.2);
  Vec p = vec1(0.4);
  CHECK(germ_pair(sum, p, psi, kSpec) ==
        doctest::Approx(germ_pair(f1, p, psi, kSpec) + 0.5 * germ_pair(f2, p, psi, kSpec))
            .epsilon(1e-13));
}
