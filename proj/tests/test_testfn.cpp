#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "germlab/coherence.hpp"
#include "germlab/rng.hpp"
#include "germlab/testfn.hpp"

using namespace germlab;

namespace {
const QuadratureSpec kSpec;

// frozen with the doubled-resolution quadrature oracle below
constexpr double kBumpIntegral1D = 0.44399381616807922;

double oracle_integral(const TestFunction& f) {
  // independent route: plain composite quadrature of pointwise values over
  // the support box, at quadruple panel count
  return integrate_box(f.support(), kSpec.refined(4),
                       [&](const Vec& y) { return f.value(y); });
}
}  // namespace

TEST_CASE("standard bump: value, support, frozen integral") {
  TestFunction f = TestFunction::standard_bump(1);
  CHECK(f.value(vec1(0.0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(f.value(vec1(1.0)) == 0.0);
  CHECK(f.value(vec1(-1.2)) == 0.0);
  CHECK(integral(f, kSpec) == doctest::Approx(kBumpIntegral1D).epsilon(1e-10));
  CHECK(std::abs(integral(f, kSpec) - oracle_integral(f)) < 1e-10);
}

TEST_CASE("rescale: identity case is pointwise identical") {
  TestFunction f = TestFunction::standard_bump(1);
  TestFunction g = rescale(f, vec1(0.0), 1.0);
  for (int i = 0; i < 1000; ++i) {
    double y = -1.2 + 2.4 * i / 999.0;
    CHECK(f.value(vec1(y)) == g.value(vec1(y)));
  }
}

TEST_CASE("rescale: direct substitution at x=0.5, lambda=0.25") {
  TestFunction f = TestFunction::standard_bump(1);
  TestFunction g = rescale(f, vec1(0.5), 0.25);
  CHECK(g.value(vec1(0.5)) == doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-14));
  // support inside [0.25, 0.75]
  CHECK(g.value(vec1(0.249)) == 0.0);
  CHECK(g.value(vec1(0.751)) == 0.0);
  Box s = g.support();
  CHECK(s.lo[0] == doctest::Approx(0.25));
  CHECK(s.hi[0] == doctest::Approx(0.75));
}

TEST_CASE("rescale: non-positive scale is a domain error") {
  TestFunction f = TestFunction::standard_bump(1);
  CHECK_THROWS_AS(rescale(f, vec1(0.0), 0.0), Error);
  CHECK_THROWS_AS(rescale(f, vec1(0.0), -1.0), Error);
}

TEST_CASE("integral invariance under rescale") {
  TestFunction f = TestFunction::standard_bump(1);
  double base = integral(f, kSpec);
  const struct {
    double x, lam;
  } cases[] = {{0.0, 1.0}, {0.3, 0.1}, {-2.0, 0.01}};
  for (const auto& c : cases) {
    TestFunction g = rescale(f, vec1(c.x), c.lam);
    CHECK(std::abs(integral(g, kSpec) - base) < 1e-9);
    CHECK(std::abs(integral(g, kSpec) - oracle_integral(g)) < 1e-9);
  }
}

TEST_CASE("integral invariance in d=2") {
  TestFunction f = TestFunction::standard_bump(2);
  double base = integral(f, kSpec);
  TestFunction g = rescale(f, vec2(0.4, -0.7), 0.05);
  CHECK(std::abs(integral(g, kSpec) - base) < 1e-9);
}

TEST_CASE("support scaling: exact zeros outside the ball") {
  TestFunction f = TestFunction::standard_bump(1);
  for (int i = 0; i < 50; ++i) {
    double x = uniform_real(3, 2 * i, -1.0, 1.0);
    double lam = std::exp(uniform_real(3, 2 * i + 1, std::log(0.01), 0.0));
    TestFunction g = rescale(f, vec1(x), lam);
    for (int k = 1; k <= 20; ++k) {
      double y = x + lam * (1.0 + 0.05 * k);
      CHECK(g.value(vec1(y)) == 0.0);
      CHECK(g.value(vec1(2.0 * x - y)) == 0.0);
    }
  }
}

TEST_CASE("quadrature convergence: doubling panels stays within tolerance") {
  TestFunction f = rescale(TestFunction::standard_bump(1), vec1(0.2), 0.37);
  double a = integral(f, kSpec);
  double b = integral(f, kSpec.refined());
  CHECK(std::abs(a - b) < kSpec.absolute_tolerance);
}

TEST_CASE("cr_norm: zero function and sup of the bump") {
  CHECK(cr_norm(TestFunction::zero(1), 3) == 0.0);
  TestFunction f = TestFunction::standard_bump(1);
  CHECK(cr_norm(f, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("cr_norm: scaling law for r=1 at lambda=1/2") {
  TestFunction f = TestFunction::standard_bump(1);
  double sup0 = cr_norm(f, 0);
  // oracle: finite-difference sup over a dense grid for sup|f'|
  double sup1 = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 10000; ++i) {
    double y = -1.0 + 2.0 * i / 9999.0;
    double d = (f.value(vec1(y + h)) - f.value(vec1(y - h))) / (2.0 * h);
    sup1 = std::max(sup1, std::abs(d));
  }
  TestFunction g = rescale(f, vec1(0.0), 0.5);
  double expected = std::max(2.0 * sup0, 4.0 * sup1);
  CHECK(cr_norm(g, 1) == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("cr_norm: C^r scaling law within 1%") {
  TestFunction f = TestFunction::standard_bump(1);
  for (int r = 0; r <= 2; ++r) {
    // per-order sups of the unit-scale bump
    std::vector<double> sup(static_cast<std::size_t>(r) + 1, 0.0);
    for (int i = 0; i < 10000; ++i) {
      double y = -1.0 + 2.0 * i / 9999.0;
      for (int k = 0; k <= r; ++k)
        sup[static_cast<std::size_t>(k)] =
            std::max(sup[static_cast<std::size_t>(k)], std::abs(f.derivative(vec1(y), mi(k))));
    }
    for (double lam : {1.0, 0.5, 0.25}) {
      double expected = 0.0;
      for (int k = 0; k <= r; ++k)
        expected = std::max(expected, std::pow(lam, -k - 1) * sup[static_cast<std::size_t>(k)]);
      double got = cr_norm(rescale(f, vec1(0.0), lam), r);
      CHECK(got == doctest::Approx(expected).epsilon(0.01));
    }
  }
}

TEST_CASE("derivatives: analytic recurrence matches finite differences") {
  TestFunction f = TestFunction::standard_bump(1);
  for (double y : {0.0, 0.3, -0.55, 0.82}) {
    for (int k = 1; k <= 3; ++k) {
      double h = 1e-6;
      // central difference of the analytic (k-1)-th derivative
      double fd = (f.derivative(vec1(y + h), mi(k - 1)) - f.derivative(vec1(y - h), mi(k - 1))) /
                  (2.0 * h);
      CHECK(f.derivative(vec1(y), mi(k)) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("poly bump stays inside the unit ball and differentiates") {
  TestFunction f = TestFunction::poly_bump(1, 0.7, {0.3, 0.0}, {-0.8, 0.0});
  CHECK(f.value(vec1(1.01)) == 0.0);
  CHECK(f.value(vec1(0.2)) ==
        doctest::Approx((0.7 + 0.3 * 0.2 - 0.8 * 0.04) * std::exp(-1.0 / (1.0 - 0.04))));
  double h = 1e-5;
  double fd = (f.value(vec1(0.2 + h)) - f.value(vec1(0.2 - h))) / (2 * h);
  CHECK(f.derivative(vec1(0.2), mi(1)) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("linear combination evaluates term sums exactly") {
  TestFunction a = TestFunction::standard_bump(1);
  TestFunction b = rescale(a, vec1(0.5), 0.5);
  TestFunction c = TestFunction::linear_combination({{2.0, a}, {-3.0, b}});
  for (double y : {-0.3, 0.0, 0.4, 0.6}) {
    CHECK(c.value(vec1(y)) == doctest::Approx(2.0 * a.value(vec1(y)) - 3.0 * b.value(vec1(y))));
  }
}

TEST_CASE("convolution profile: mass and symmetry") {
  TestFunction a = TestFunction::standard_bump(1);
  TestFunction c = convolve(a, a);
  // int (a*a) = (int a)^2
  CHECK(integral(c, kSpec) == doctest::Approx(kBumpIntegral1D * kBumpIntegral1D).epsilon(1e-8));
  CHECK(c.value(vec1(0.7)) == doctest::Approx(c.value(vec1(-0.7))).epsilon(1e-12));
  CHECK(c.value(vec1(2.01)) == 0.0);
}

TEST_CASE("recenter: degenerate and generic identities") {
  TestFunction u = TestFunction::standard_bump(1);
  SUBCASE("q = a collapses to the original") {
    auto [ut, lam1] = recenter(u, vec1(0.3), vec1(0.3), 0.2);
    CHECK(lam1 == doctest::Approx(0.2));
    TestFunction lhs = rescale(u, vec1(0.3), 0.2);
    TestFunction rhs = rescale(ut, vec1(0.3), lam1);
    for (int i = 0; i < 100; ++i) {
      double y = 0.3 + 0.25 * (2.0 * i / 99.0 - 1.0);
      CHECK(std::abs(lhs.value(vec1(y)) - rhs.value(vec1(y))) < 1e-15);
    }
  }
  SUBCASE("worked example |q-a| = 0.3, lambda = 0.1") {
    Vec q = vec1(0.55), a = vec1(0.25);
    auto [ut, lam1] = recenter(u, q, a, 0.1);
    CHECK(lam1 == doctest::Approx(0.4).epsilon(1e-15));
    TestFunction lhs = rescale(u, q, 0.1);
    TestFunction rhs = rescale(ut, a, lam1);
    for (int i = 0; i < 1000; ++i) {
      double y = -0.5 + 1.5 * i / 999.0;
      CHECK(std::abs(lhs.value(vec1(y)) - rhs.value(vec1(y))) <= 1e-12);
    }
    // utilde stays inside the unit ball: |w| + lambda2 = 1
    Box s = ut.support();
    CHECK(s.lo[0] >= -1.0 - 1e-15);
    CHECK(s.hi[0] <= 1.0 + 1e-15);
    CHECK(s.hi[0] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("100 random triples hold pointwise to 1e-12") {
    for (int t = 0; t < 100; ++t) {
      Vec q = vec1(uniform_real(11, 3 * t, -1.0, 1.0));
      Vec a = vec1(uniform_real(11, 3 * t + 1, -1.0, 1.0));
      double lam = std::exp(uniform_real(11, 3 * t + 2, std::log(0.0625), 0.0));
      auto [ut, lam1] = recenter(u, q, a, lam);
      TestFunction lhs = rescale(u, q, lam);
      TestFunction rhs = rescale(ut, a, lam1);
      for (int i = 0; i < 25; ++i) {
        double y = q[0] + lam * (2.4 * i / 24.0 - 1.2);
        CHECK(std::abs(lhs.value(vec1(y)) - rhs.value(vec1(y))) <= 1e-12);
      }
    }
  }
}
