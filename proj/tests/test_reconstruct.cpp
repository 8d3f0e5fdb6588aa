#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "germlab/reconstruct.hpp"

using namespace germlab;

namespace {
const QuadratureSpec kSpec;
const OpenSetDomain kLine = OpenSetDomain::whole_space(1);

TestFunction probe_psi() {
  return rescale(TestFunction::standard_bump(1), vec1(0.1), 0.4);
}

double direct_pairing(const SmoothFunction& g, const TestFunction& psi) {
  PairingOracle t = PairingOracle::smooth_density(g, OpenSetDomain::whole_space(1));
  return t.pair(psi, kSpec.refined());
}
}  // namespace

TEST_CASE("zero germ reconstructs to an all-zero sequence") {
  Germ f = make_constant(PairingOracle::zero(kLine));
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
  ReconstructResult res = reconstruct_local(f, m, probe_psi(), 6, kSpec);
  for (double v : res.diag.values) CHECK(v == 0.0);
  CHECK(res.value == 0.0);
}

TEST_CASE("constant germ reconstructs the backing distribution") {
  SmoothFunction u = SmoothFunction::sine(1.0, 0.6);
  Germ f = make_constant(PairingOracle::smooth_density(u, kLine));
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
  TestFunction psi = probe_psi();
  ReconstructResult res = reconstruct_local(f, m, psi, kReconstructNMax, kSpec);
  CHECK(res.diag.converged);
  CHECK(res.value == doctest::Approx(direct_pairing(u, psi)).epsilon(1e-6));
}

TEST_CASE("taylor germs reconstruct the function itself") {
  SUBCASE("k = 1 polynomial") {
    SmoothFunction g = SmoothFunction::polynomial({0.0, 0.0, 1.0});
    Germ f = make_taylor(g, 1, kLine);
    MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
    TestFunction psi = probe_psi();
    ReconstructResult res = reconstruct_local(f, m, psi, kReconstructNMax, kSpec);
    CHECK(res.diag.converged);
    CHECK(res.value == doctest::Approx(direct_pairing(g, psi)).epsilon(1e-6));
  }
  SUBCASE("k = 2 of sin") {
    SmoothFunction g = SmoothFunction::sine(1.0);
    Germ f = make_taylor(g, 2, kLine);
    MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
    TestFunction psi = probe_psi();
    ReconstructResult res = reconstruct_local(f, m, psi, kReconstructNMax, kSpec);
    CHECK(res.diag.converged);
    CHECK(res.value == doctest::Approx(direct_pairing(g, psi)).epsilon(1e-6));
  }
}

TEST_CASE("reconstruction is linear in the germ") {
  SmoothFunction g1 = SmoothFunction::sine(1.0);
  SmoothFunction g2 = SmoothFunction::polynomial({0.2, 0.5});
  Germ f1 = make_taylor(g1, 1, kLine);
  Germ f2 = make_constant(PairingOracle::smooth_density(g2, kLine));
  Germ sum = germ_linear_combination({{1.0, f1}, {2.0, f2}});
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
  TestFunction psi = probe_psi();
  int n = 8;
  double lhs = reconstruct_stage(sum, m, psi, n, kSpec, ExecPolicy::Parallel);
  double rhs = reconstruct_stage(f1, m, psi, n, kSpec, ExecPolicy::Parallel) +
               2.0 * reconstruct_stage(f2, m, psi, n, kSpec, ExecPolicy::Parallel);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("parallel stage equals the serial reference") {
  Germ f = make_taylor(SmoothFunction::sine(1.0), 2, kLine);
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 2, kSpec);
  TestFunction psi = probe_psi();
  for (int n : {3, 6}) {
    double par = reconstruct_stage(f, m, psi, n, kSpec, ExecPolicy::Parallel);
    double ref = reconstruct_stage_reference(f, m, psi, n, kSpec);
    CHECK(std::abs(par - ref) <= 1e-13);
  }
}

TEST_CASE("support margin: start scale adapts, impossible margins fail") {
  OpenSetDomain dom = OpenSetDomain::box(Box::interval(-1.0, 1.0));
  Germ f = make_taylor(SmoothFunction::sine(1.0), 1, dom);
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
  // margin 0.25: kernel radius 0.75 eps <= 0.25 forces eps <= 1/3, n >= 2
  TestFunction psi = rescale(TestFunction::standard_bump(1), vec1(0.0), 0.75);
  ReconstructResult res = reconstruct_local(f, m, psi, kReconstructNMax, kSpec);
  CHECK(res.diag.stages.front() >= 2);
  CHECK(res.diag.converged);
  // support touching the boundary is a domain error
  TestFunction wide = rescale(TestFunction::standard_bump(1), vec1(0.0), 0.999999999);
  CHECK_THROWS_AS(reconstruct_local(f, wide.support().contains(vec1(0.0))
                                        ? m
                                        : m,
                                    wide, kReconstructNMax, kSpec),
                  Error);
}

TEST_CASE("increments decay geometrically for positive-exponent germs") {
  Germ f = make_constant(PairingOracle::smooth_density(SmoothFunction::sine(1.0, 0.6), kLine));
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 2, kSpec);
  ReconstructResult res = reconstruct_local(f, m, probe_psi(), kReconstructNMax, kSpec, ExecPolicy::Parallel, 1e-12);
  // smooth density with a symmetric mollifier: quadratic gain per dyadic step
  CHECK(res.diag.increment_ratio <= std::pow(2.0, -2.0) + 0.1);
}

TEST_CASE("two mollifier bases agree on the reconstruction value") {
  Germ f = make_taylor(SmoothFunction::sine(1.0), 2, kLine);
  TestFunction psi = probe_psi();
  MollifierFamily m1 = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
  MollifierFamily m2 =
      build_mollifier(TestFunction::poly_bump(1, 1.0, {0.0, 0.0}, {0.25, 0.0}), 1, kSpec);
  ReconstructResult r1 = reconstruct_local(f, m1, psi, kReconstructNMax, kSpec);
  ReconstructResult r2 = reconstruct_local(f, m2, psi, kReconstructNMax, kSpec);
  CHECK(r1.diag.converged);
  CHECK(r2.diag.converged);
  CHECK(std::abs(r1.value - r2.value) <= 1e-5);
}

TEST_CASE("difference of two admissible reconstructions pairs to zero") {
  // uniqueness surrogate: with positive exponents, both mollifier bases give
  // the same distribution; their difference annihilates every test function
  Germ f = make_constant(PairingOracle::smooth_density(SmoothFunction::cosine(1.0), kLine));
  MollifierFamily m1 = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
  MollifierFamily m2 =
      build_mollifier(TestFunction::poly_bump(1, 1.0, {0.0, 0.0}, {0.25, 0.0}), 1, kSpec);
  for (double c : {-0.4, 0.2}) {
    TestFunction h = rescale(TestFunction::standard_bump(1), vec1(c), 0.3);
    double v1 = reconstruct_local(f, m1, h, kReconstructNMax, kSpec).value;
    double v2 = reconstruct_local(f, m2, h, kReconstructNMax, kSpec).value;
    CHECK(std::abs(v1 - v2) <= 1e-5);
  }
}

TEST_CASE("mollifier order choice follows the fitted alpha") {
  CoherenceReport rep;
  rep.alpha_hat = -0.6;
  CHECK(mollifier_order_for(rep) == 2);
  rep.alpha_hat = 0.0;
  CHECK(mollifier_order_for(rep) == 1);
  rep.alpha_hat = -1.4;
  CHECK(mollifier_order_for(rep) == 3);
  rep.exact = true;
  CHECK(mollifier_order_for(rep) == 1);
}

TEST_CASE("residual scan: constant germ residuals sit at the noise floor") {
  Germ f = make_constant(PairingOracle::smooth_density(SmoothFunction::sine(1.0, 0.6), kLine));
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
  LocalReconstruction rf(f, m, kReconstructNMax, kSpec);
  ScanGrid grid = make_scan_grid(Box::interval(-0.4, 0.4), std::nullopt, 3, 5, 2, 1);
  ResidualReport rep = residual_scan(
      f, [&rf](const Integrand& h) { return rf(h); }, grid, TestFunction::standard_bump(1), kSpec);
  CHECK(rep.max_residual <= 1e-6);
}

TEST_CASE("residual scan: taylor k=2 of sin decays at the cubic rate") {
  Germ f = make_taylor(SmoothFunction::sine(1.0), 2, kLine);
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(1), 1, kSpec);
  LocalReconstruction rf(f, m, kReconstructNMax, kSpec);
  ScanGrid grid = make_scan_grid(Box::interval(-0.4, 0.4), std::nullopt, 3, 5, 2, 1);
  // an asymmetric h keeps the third-moment term alive, which carries the rate
  TestFunction h = TestFunction::poly_bump(1, 1.0, {0.7, 0.0}, {0.0, 0.0});
  ResidualReport rep = residual_scan(
      f, [&rf](const Integrand& hh) { return rf(hh); }, grid, h, kSpec);
  CHECK(rep.slope == doctest::Approx(3.0).epsilon(0.1));
}
