#include "germlab/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "germlab/csvio.hpp"
#include "germlab/error.hpp"
#include "germlab/manifold.hpp"
#include "germlab/parallel.hpp"
#include "germlab/reconstruct.hpp"

namespace germlab {

namespace {

std::string outdir_for(const ExperimentConfig& cfg) {
  const char* env = std::getenv("GERMLAB_OUTDIR");
  std::string dir = env && *env ? env : cfg.get_or("output.dir", "out");
  std::filesystem::create_directories(dir);
  return dir;
}

QuadratureSpec quad_from(const ExperimentConfig& cfg) {
  QuadratureSpec q;
  q.panels_per_unit = cfg.int_or("quadrature.panels_per_unit", q.panels_per_unit);
  q.nodes_per_panel = cfg.int_or("quadrature.nodes_per_panel", q.nodes_per_panel);
  q.min_panels = cfg.int_or("quadrature.min_panels", q.min_panels);
  q.absolute_tolerance = cfg.num_or("quadrature.abs_tol", q.absolute_tolerance);
  return q;
}

SmoothFunction smooth_from_spec(const std::string& spec) {
  auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto split_args = [&]() {
    std::vector<double> out;
    std::stringstream ss(args);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(std::stod(part));
    return out;
  };
  if (name == "one") return SmoothFunction::constant(1.0);
  if (name == "constant") {
    auto a = split_args();
    return SmoothFunction::constant(a.empty() ? 1.0 : a[0]);
  }
  if (name == "sin") return SmoothFunction::sine(1.0);
  if (name == "cos") return SmoothFunction::cosine(1.0);
  if (name == "ysquared") return SmoothFunction::polynomial({0.0, 0.0, 1.0});
  if (name == "poly") return SmoothFunction::polynomial(split_args());
  if (name == "lacunary") {
    auto a = split_args();
    if (a.empty()) fail_config("lacunary density needs an exponent: lacunary:<beta>");
    return SmoothFunction::lacunary(a[0], a.size() > 1 ? static_cast<int>(a[1]) : 12);
  }
  fail_config("unknown smooth function spec: " + spec);
}

OpenSetDomain domain_from(const ExperimentConfig& cfg) {
  std::string kind = cfg.get("domain.kind");
  if (kind == "box") {
    std::vector<double> lo = cfg.nums("domain.lo");
    std::vector<double> hi = cfg.nums("domain.hi");
    if (lo.size() != hi.size()) fail_config("domain.lo/hi size mismatch");
    if (lo.size() == 1) return OpenSetDomain::box(Box::interval(lo[0], hi[0]));
    return OpenSetDomain::box(Box::rect(lo[0], hi[0], lo[1], hi[1]));
  }
  if (kind == "line") return OpenSetDomain::whole_space(1);
  fail_config("domain kind '" + kind + "' is not an open subset of R^d");
}

Germ germ_from(const ExperimentConfig& cfg, const OpenSetDomain& domain) {
  std::string kind = cfg.get("germ.kind");
  if (kind == "constant") {
    std::string dens = cfg.get("germ.density");
    if (dens.rfind("dirac", 0) == 0) {
      auto colon = dens.find(':');
      double loc = colon == std::string::npos ? 0.0 : std::stod(dens.substr(colon + 1));
      return make_constant(PairingOracle::dirac(vec1(loc), 1.0, domain), "constant-dirac");
    }
    if (dens.rfind("indicator", 0) == 0) {
      auto colon = dens.find(':');
      if (colon == std::string::npos) fail_config("indicator density needs bounds: indicator:a,b");
      std::stringstream ss(dens.substr(colon + 1));
      std::string a, b;
      std::getline(ss, a, ',');
      std::getline(ss, b, ',');
      return make_constant(
          PairingOracle::indicator_density(Box::interval(std::stod(a), std::stod(b)), 1.0, domain),
          "constant-indicator");
    }
    return make_constant(PairingOracle::smooth_density(smooth_from_spec(dens), domain),
                         "constant-" + dens);
  }
  if (kind == "taylor")
    return make_taylor(smooth_from_spec(cfg.get("germ.g")), cfg.int_or("germ.k", 1), domain);
  if (kind == "young")
    return make_young(SmoothFunction::lacunary(cfg.num("germ.beta_g"), cfg.int_or("germ.J", 12)),
                      cfg.num("germ.beta_g"), cfg.num("germ.a"), cfg.int_or("germ.J", 12), domain);
  fail_config("unknown germ kind: " + kind);
}

Atlas atlas_from_name(const std::string& name) {
  if (name == "two-arc") return circle_two_arc_atlas();
  if (name == "three-arc") return circle_three_arc_atlas();
  if (name == "two-arc-scaled") return circle_two_arc_scaled_atlas();
  if (name == "torus-four") return torus_four_patch_atlas();
  fail_config("unknown atlas kind: " + name);
}

ManifoldGerm manifold_germ_from(const ExperimentConfig& cfg, const Manifold& m) {
  std::string kind = cfg.get("germ.kind");
  if (kind == "constant")
    return ManifoldGerm::constant_density(smooth_from_spec(cfg.get("germ.density")), m);
  if (kind == "taylor")
    return ManifoldGerm::taylor(smooth_from_spec(cfg.get("germ.g")), cfg.int_or("germ.k", 1), m);
  if (kind == "young")
    return ManifoldGerm::young(cfg.num("germ.beta_g"), cfg.num("germ.a"),
                               cfg.int_or("germ.J", 12), m);
  fail_config("unknown germ kind: " + kind);
}

// Open-set germ for scan experiments: either directly on a box/line domain or
// the chart-0 local germ of a circle/torus atlas.
struct ScanSetup {
  Germ germ;
  OpenSetDomain domain;
};

ScanSetup scan_setup(const ExperimentConfig& cfg) {
  std::string kind = cfg.get("domain.kind");
  if (kind == "circle" || kind == "torus") {
    Atlas atlas = atlas_from_name(
        cfg.get_or("atlas.kind", kind == "torus" ? "torus-four" : "two-arc"));
    int chart = cfg.int_or("atlas.chart", 0);
    if (chart < 0 || chart >= atlas.size()) fail_config("atlas.chart out of range");
    ManifoldGerm mg = manifold_germ_from(cfg, atlas.manifold());
    Germ g = mg.chart_germ(atlas.charts()[static_cast<std::size_t>(chart)]);
    OpenSetDomain dom = g.domain();
    return {std::move(g), std::move(dom)};
  }
  OpenSetDomain dom = domain_from(cfg);
  return {germ_from(cfg, dom), dom};
}

ScanGrid grid_from(const ExperimentConfig& cfg, const OpenSetDomain& domain) {
  Box k;
  if (cfg.has("scan.k_lo")) {
    std::vector<double> lo = cfg.nums("scan.k_lo");
    std::vector<double> hi = cfg.nums("scan.k_hi");
    if (lo.size() == 1)
      k = Box::interval(lo[0], hi[0]);
    else
      k = Box::rect(lo[0], hi[0], lo[1], hi[1]);
  } else {
    Box b = domain.bounding_box();
    if (domain.unbounded()) b = Box::interval(-1.0, 1.0);
    k = b.shrunk(0.25 * b.min_width());
  }
  std::optional<OpenSetDomain> ambient;
  if (!domain.unbounded()) ambient = domain;
  return make_scan_grid(k, ambient, cfg.int_or("scan.m_min", 3), cfg.int_or("scan.m_max", 10),
                        cfg.int_or("scan.n_pairs_per_stratum", 12), cfg.seed());
}

TestFunction scan_testfn(const ExperimentConfig& cfg, int dim) {
  std::string kind = cfg.get_or("testfn.kind", "bump");
  if (kind == "bump") return TestFunction::standard_bump(dim);
  if (kind == "widened-bump")
    return TestFunction::poly_bump(dim, 1.0, {0.0, 0.0}, {0.25, 0.0});
  fail_config("unknown test function kind: " + kind);
}

void write_coherence_csv(const std::string& path, const ExperimentConfig& cfg,
                         const std::vector<CoherenceRow>& rows) {
  CsvWriter csv(path, cfg.hash(), cfg.seed(), "p,q,lambda,value,regime");
  for (const CoherenceRow& r : rows)
    csv.row({fmt_vec(r.p), fmt_vec(r.q), fmt_g17(r.lambda), fmt_g17(r.value),
             r.near ? "NEAR" : "FAR"});
}

int run_coherence(const ExperimentConfig& cfg, RunResult& res) {
  QuadratureSpec spec = quad_from(cfg);
  ScanSetup setup = scan_setup(cfg);
  ScanGrid grid = grid_from(cfg, setup.domain);
  TestFunction f = scan_testfn(cfg, setup.domain.dim());
  auto rows = coherence_scan(setup.germ, grid, f, spec);
  CoherenceReport rep = fit_exponents(rows);

  std::string dir = outdir_for(cfg);
  write_coherence_csv(dir + "/coherence.csv", cfg, rows);
  res.outputs.push_back(dir + "/coherence.csv");
  SummaryWriter sum(dir + "/summary.txt", cfg.hash(), cfg.seed());
  sum.kv("experiment", "coherence");
  sum.kv("germ", setup.germ.label());
  sum.kv("rows", static_cast<double>(rows.size()));
  if (rep.exact) {
    sum.kv("fit", "EXACT (all values numerically zero)");
  } else {
    sum.kv("gamma_hat", rep.gamma_hat);
    sum.kv("alpha_hat", rep.alpha_hat);
    sum.kv("gamma_far", rep.gamma_far);
    sum.kv("C_hat", rep.c_hat);
    sum.kv("near_rms_log", rep.near_rms);
    sum.kv("far_rms_log", rep.far_rms);
    sum.check("alpha_le_min(0,gamma)", rep.alpha_hat <= std::min(0.0, rep.gamma_hat) + 0.05);
    sum.check("regime_consistency", std::abs(rep.gamma_hat - rep.gamma_far) <= 0.15);
  }
  res.outputs.push_back(sum.path());
  res.message = rep.exact ? "coherence: EXACT" : "coherence: gamma_hat=" + fmt_g17(rep.gamma_hat);
  return sum.all_passed() ? 0 : 1;
}

int run_homogeneity(const ExperimentConfig& cfg, RunResult& res) {
  QuadratureSpec spec = quad_from(cfg);
  ScanSetup setup = scan_setup(cfg);
  ScanGrid grid = grid_from(cfg, setup.domain);
  TestFunction f = scan_testfn(cfg, setup.domain.dim());
  HomogeneityReport rep = homogeneity_scan(setup.germ, grid, f, spec);

  std::string dir = outdir_for(cfg);
  CsvWriter csv(dir + "/homogeneity.csv", cfg.hash(), cfg.seed(), "p,lambda,value");
  for (const HomogeneityRow& r : rep.rows)
    csv.row({fmt_vec(r.p), fmt_g17(r.lambda), fmt_g17(r.value)});
  res.outputs.push_back(csv.path());

  SummaryWriter sum(dir + "/summary.txt", cfg.hash(), cfg.seed());
  sum.kv("experiment", "homogeneity");
  sum.kv("germ", setup.germ.label());
  if (rep.exact) {
    sum.kv("fit", "EXACT (all values numerically zero)");
  } else {
    sum.kv("beta_hat", rep.beta_hat);
    sum.kv("C_hat", rep.c_hat);
    // beta < gamma whenever a coherence fit is available on the same grid
    auto rows = coherence_scan(setup.germ, grid, f, spec);
    CoherenceReport crep = fit_exponents(rows);
    if (!crep.exact) sum.check("beta_lt_gamma", rep.beta_hat < crep.gamma_hat + 0.05);
  }
  res.outputs.push_back(sum.path());
  res.message = rep.exact ? "homogeneity: EXACT" : "homogeneity: beta_hat=" + fmt_g17(rep.beta_hat);
  return sum.all_passed() ? 0 : 1;
}

int run_enhanced(const ExperimentConfig& cfg, RunResult& res) {
  QuadratureSpec spec = quad_from(cfg);
  ScanSetup setup = scan_setup(cfg);
  ScanGrid grid = grid_from(cfg, setup.domain);
  TestFunction f = scan_testfn(cfg, setup.domain.dim());
  CoherenceReport prior = fit_exponents(coherence_scan(setup.germ, grid, f, spec));
  int r = cfg.has("scan.r") ? cfg.int_or("scan.r", 2)
                            : (prior.exact ? 1 : static_cast<int>(std::floor(-prior.alpha_hat)) + 1);
  int n_psi = cfg.int_or("scan.n_psi", 100);
  EnhancedReport rep = enhanced_check(setup.germ, grid, r, n_psi, cfg.seed() ^ 0x9e5ULL, prior, spec);

  std::string dir = outdir_for(cfg);
  CsvWriter csv(dir + "/enhanced.csv", cfg.hash(), cfg.seed(), "p,q,lambda,psi_id,ratio");
  for (const EnhancedRow& row : rep.rows)
    csv.row({fmt_vec(row.p), fmt_vec(row.q), fmt_g17(row.lambda), std::to_string(row.psi_id),
             fmt_g17(row.ratio)});
  res.outputs.push_back(csv.path());

  SummaryWriter sum(dir + "/summary.txt", cfg.hash(), cfg.seed());
  sum.kv("experiment", "enhanced");
  sum.kv("germ", setup.germ.label());
  sum.kv("r", static_cast<double>(r));
  sum.kv("n_psi", static_cast<double>(n_psi));
  sum.kv("max_ratio", rep.max_ratio);
  sum.kv("witness", fmt_vec(rep.witness.p) + " " + fmt_vec(rep.witness.q) + " lambda=" +
                        fmt_g17(rep.witness.lambda) + " psi=" + std::to_string(rep.witness.psi_id));
  sum.check("ratio_finite", std::isfinite(rep.max_ratio));
  res.outputs.push_back(sum.path());
  res.message = "enhanced: max_ratio=" + fmt_g17(rep.max_ratio);
  return sum.all_passed() ? 0 : 1;
}

int run_reconstruct(const ExperimentConfig& cfg, RunResult& res) {
  QuadratureSpec spec = quad_from(cfg);
  ScanSetup setup = scan_setup(cfg);
  ScanGrid grid = grid_from(cfg, setup.domain);
  TestFunction f = scan_testfn(cfg, setup.domain.dim());
  CoherenceReport prior = fit_exponents(coherence_scan(setup.germ, grid, f, spec));
  int order = cfg.get_or("mollifier.order", "AUTO") == "AUTO"
                  ? mollifier_order_for(prior)
                  : cfg.int_or("mollifier.order", 1);
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(setup.domain.dim()), order, spec);

  Vec center = grid.compact.center();
  if (cfg.has("testfn.center")) {
    auto c = cfg.nums("testfn.center");
    for (std::size_t i = 0; i < c.size(); ++i) center[static_cast<int>(i)] = c[i];
  }
  double scale = cfg.num_or("testfn.scale", 0.25 * grid.compact.min_width());
  TestFunction psi = rescale(scan_testfn(cfg, setup.domain.dim()), center, scale);

  ReconstructResult rec =
      reconstruct_local(setup.germ, m, psi, cfg.int_or("mollifier.n_max", kReconstructNMax), spec);

  std::string dir = outdir_for(cfg);
  {
    std::ofstream seq(dir + "/reconstruct_seq.dat");
    seq << header_line(cfg.hash(), cfg.seed()) << "\n";
    for (std::size_t i = 0; i < rec.diag.values.size(); ++i)
      seq << rec.diag.stages[i] << " " << fmt_g17(rec.diag.values[i]) << "\n";
    res.outputs.push_back(dir + "/reconstruct_seq.dat");
  }
  SummaryWriter sum(dir + "/summary.txt", cfg.hash(), cfg.seed());
  sum.kv("experiment", "reconstruct");
  sum.kv("germ", setup.germ.label());
  sum.kv("mollifier_order", static_cast<double>(order));
  sum.kv("value", rec.value);
  sum.kv("converged", rec.diag.converged ? "yes" : "no (n_max reached)");
  sum.kv("n_star", static_cast<double>(rec.diag.n_star));
  sum.kv("increment_ratio", rec.diag.increment_ratio);
  sum.kv("richardson", rec.diag.richardson);
  bool gamma_positive = prior.exact || prior.gamma_hat > 0.0;
  if (gamma_positive) sum.check("converged", rec.diag.converged);
  res.outputs.push_back(sum.path());
  res.message = "reconstruct: value=" + fmt_g17(rec.value);
  if (gamma_positive && !rec.diag.converged) return 3;
  return sum.all_passed() ? 0 : 1;
}

int run_residual(const ExperimentConfig& cfg, RunResult& res) {
  QuadratureSpec spec = quad_from(cfg);
  ScanSetup setup = scan_setup(cfg);
  ScanGrid grid = grid_from(cfg, setup.domain);
  TestFunction f = scan_testfn(cfg, setup.domain.dim());
  CoherenceReport prior = fit_exponents(coherence_scan(setup.germ, grid, f, spec));
  int order = cfg.get_or("mollifier.order", "AUTO") == "AUTO"
                  ? mollifier_order_for(prior)
                  : cfg.int_or("mollifier.order", 1);
  MollifierFamily m = build_mollifier(TestFunction::standard_bump(setup.domain.dim()), order, spec);
  LocalReconstruction rf(setup.germ, m, cfg.int_or("mollifier.n_max", kReconstructNMax), spec);

  ResidualLaw law = cfg.get_or("residual.law", "power") == "log" ? ResidualLaw::LogEnvelope
                                                                  : ResidualLaw::PowerLaw;
  ResidualReport rep = residual_scan(
      setup.germ, [&rf](const Integrand& h) { return rf(h); }, grid, f, spec, law);

  std::string dir = outdir_for(cfg);
  CsvWriter csv(dir + "/residual.csv", cfg.hash(), cfg.seed(), "p,lambda,residual");
  for (const ResidualRow& r : rep.rows)
    csv.row({fmt_vec(r.p), fmt_g17(r.lambda), fmt_g17(r.residual)});
  res.outputs.push_back(csv.path());

  SummaryWriter sum(dir + "/summary.txt", cfg.hash(), cfg.seed());
  sum.kv("experiment", "residual");
  sum.kv("germ", setup.germ.label());
  if (!prior.exact) sum.kv("gamma_hat", prior.gamma_hat);
  if (law == ResidualLaw::PowerLaw) {
    sum.kv("slope", rep.slope);
  } else {
    sum.kv("log_coeff", rep.log_coeff);
    sum.kv("log_intercept", rep.log_intercept);
    sum.check("log_coeff_positive", rep.log_coeff > 0.0);
  }
  sum.kv("max_residual", rep.max_residual);
  res.outputs.push_back(sum.path());
  res.message = "residual: slope=" + fmt_g17(rep.slope);
  return sum.all_passed() ? 0 : 1;
}

int run_glue(const ExperimentConfig& cfg, RunResult& res) {
  QuadratureSpec spec = quad_from(cfg);
  Atlas atlas = atlas_from_name(cfg.get_or("atlas.kind", "two-arc"));
  ManifoldGerm mg = manifold_germ_from(cfg, atlas.manifold());
  std::string locals_kind = cfg.get_or("glue.locals", "density");
  double tol = cfg.num_or("glue.tol", locals_kind == "density" ? 1e-9 : 1e-5);

  std::vector<LocalDistribution> locals;
  if (locals_kind == "density") {
    if (mg.kind() != ManifoldGerm::Kind::Constant)
      fail_config("glue.locals=density needs a constant germ");
    for (int j = 0; j < atlas.size(); ++j) {
      PairingOracle t =
          mg.chart_germ(atlas.charts()[static_cast<std::size_t>(j)]).at(atlas.charts()[static_cast<std::size_t>(j)].image().center());
      QuadratureSpec sp = spec;
      locals.push_back([t, sp](const Integrand& g) { return t.pair(g, sp); });
    }
  } else if (locals_kind == "reconstruct") {
    CoherenceReport prior;
    prior.exact = true;
    int order = cfg.get_or("mollifier.order", "AUTO") == "AUTO"
                    ? 2
                    : cfg.int_or("mollifier.order", 2);
    MollifierFamily m = build_mollifier(TestFunction::standard_bump(atlas.dim()), order, spec);
    for (int j = 0; j < atlas.size(); ++j) {
      LocalReconstruction recon(mg.chart_germ(atlas.charts()[static_cast<std::size_t>(j)]), m,
                                cfg.int_or("mollifier.n_max", kReconstructNMax), spec);
      locals.push_back([recon](const Integrand& g) { return recon(g); });
    }
  } else {
    fail_config("unknown glue.locals kind: " + locals_kind);
  }

  double perturb = cfg.num_or("glue.perturb", 0.0);
  if (perturb != 0.0) {
    // add an epsilon unit-integral bump to the first local
    const Chart& c0 = atlas.charts()[0];
    Box im = c0.image();
    TestFunction bump = TestFunction::standard_bump(atlas.dim());
    QuadratureSpec sp = spec;
    double mass = integral(bump, sp);
    TestFunction unit = rescale(bump, im.center(), im.min_width() / 6.0).scaled_by(1.0 / mass);
    PairingOracle extra = PairingOracle::smooth_density(
        SmoothFunction::custom([unit](const Vec& y) { return unit.value(y); }, "perturbation"),
        OpenSetDomain::box(im));
    LocalDistribution base = locals[0];
    locals[0] = [base, extra, perturb, sp](const Integrand& g) {
      return base(g) + perturb * extra.pair(g, sp);
    };
  }

  GlueResult glue = glue_check(locals, atlas, cfg.int_or("glue.bumps_per_overlap", 20),
                               cfg.seed(), tol);

  std::string dir = outdir_for(cfg);
  CsvWriter csv(dir + "/glue.csv", cfg.hash(), cfg.seed(), "chart_i,chart_j,g_id,lhs,rhs,abs_diff");
  for (const GlueRow& row : glue.rows)
    csv.row({std::to_string(row.chart_i), std::to_string(row.chart_j), std::to_string(row.g_id),
             fmt_g17(row.lhs), fmt_g17(row.rhs), fmt_g17(row.abs_diff)});
  res.outputs.push_back(csv.path());

  SummaryWriter sum(dir + "/summary.txt", cfg.hash(), cfg.seed());
  sum.kv("experiment", "glue");
  sum.kv("atlas", atlas.label());
  sum.kv("locals", locals_kind);
  sum.kv("tol", tol);
  sum.kv("max_abs_diff", glue.max_abs_diff);
  sum.kv("witness", "charts (" + std::to_string(glue.witness.chart_i) + "," +
                        std::to_string(glue.witness.chart_j) + ") g_id " +
                        std::to_string(glue.witness.g_id) + " diff " +
                        fmt_g17(glue.witness.abs_diff));
  sum.check("overlap_condition", glue.pass);
  res.outputs.push_back(sum.path());
  res.message = "glue: max_abs_diff=" + fmt_g17(glue.max_abs_diff);
  return glue.pass ? 0 : 1;
}

int run_atlas_compare(const ExperimentConfig& cfg, RunResult& res) {
  QuadratureSpec spec = quad_from(cfg);
  Atlas a = atlas_from_name(cfg.get("atlas.kind"));
  Atlas b = atlas_from_name(cfg.get("compare.with"));
  ManifoldGerm mg = manifold_germ_from(cfg, a.manifold());
  GlobalOptions opts;
  opts.seed = cfg.seed();
  opts.n_max = cfg.int_or("mollifier.n_max", kReconstructNMax);
  if (cfg.get_or("mollifier.order", "AUTO") != "AUTO")
    opts.mollifier_order = cfg.int_or("mollifier.order", 2);
  CompareResult cmp = atlas_compare(mg, a, b, cfg.int_or("compare.n_h", 10), cfg.seed(), opts, spec);

  std::string dir = outdir_for(cfg);
  CsvWriter csv(dir + "/compare.csv", cfg.hash(), cfg.seed(), "h_id,rf_a,rf_b,rel_diff");
  for (const CompareRow& row : cmp.rows)
    csv.row({std::to_string(row.h_id), fmt_g17(row.rf_a), fmt_g17(row.rf_b),
             fmt_g17(row.rel_diff)});
  res.outputs.push_back(csv.path());

  bool gamma_positive = !mg.nominal_gamma() || *mg.nominal_gamma() > 0.0;
  double tol = cfg.num_or("compare.tol", 1e-5);
  SummaryWriter sum(dir + "/summary.txt", cfg.hash(), cfg.seed());
  sum.kv("experiment", "atlas-compare");
  sum.kv("atlas_a", a.label());
  sum.kv("atlas_b", b.label());
  sum.kv("germ", mg.label());
  sum.kv("max_rel_diff", cmp.max_rel_diff);
  if (gamma_positive)
    sum.check("atlas_independence", cmp.max_rel_diff <= tol);
  else
    sum.kv("note", "nonpositive exponent: discrepancy reported, not required to vanish");
  res.outputs.push_back(sum.path());
  res.message = "atlas-compare: max_rel_diff=" + fmt_g17(cmp.max_rel_diff);
  return sum.all_passed() ? 0 : 1;
}

int run_demo_impl(const ExperimentConfig& cfg, RunResult& res);

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult res;
  try {
    cfg.validate();
    configure_workers_from_env();
    const std::string& kind = cfg.kind();
    if (kind == "coherence") res.exit_code = run_coherence(cfg, res);
    else if (kind == "homogeneity") res.exit_code = run_homogeneity(cfg, res);
    else if (kind == "enhanced") res.exit_code = run_enhanced(cfg, res);
    else if (kind == "reconstruct") res.exit_code = run_reconstruct(cfg, res);
    else if (kind == "residual") res.exit_code = run_residual(cfg, res);
    else if (kind == "glue") res.exit_code = run_glue(cfg, res);
    else if (kind == "atlas-compare") res.exit_code = run_atlas_compare(cfg, res);
    else if (kind == "demo") res.exit_code = run_demo_impl(cfg, res);
    else fail_config("unknown experiment kind: " + kind);
  } catch (const Error& e) {
    res.message = e.what();
    switch (e.kind()) {
      case ErrorKind::NonConvergence: res.exit_code = 3; break;
      case ErrorKind::Verification: res.exit_code = 1; break;
      default: res.exit_code = 2; break;
    }
  }
  return res;
}

namespace {

// dedicated nonuniqueness scenario: two seeded partitions of unity applied to
// the same nonpositive-exponent germ must produce visibly different
// assemblies on some ensemble member.
int run_nonuniqueness(const ExperimentConfig& cfg, RunResult& res) {
  QuadratureSpec spec = quad_from(cfg);
  Atlas atlas = atlas_from_name(cfg.get_or("atlas.kind", "two-arc"));
  ManifoldGerm mg = manifold_germ_from(cfg, atlas.manifold());
  GlobalOptions opts;
  opts.seed = cfg.seed();
  opts.mollifier_order = cfg.get_or("mollifier.order", "AUTO") == "AUTO"
                             ? std::optional<int>(3)
                             : std::optional<int>(cfg.int_or("mollifier.order", 3));
  opts.scan_m_max = 7;
  std::vector<ManifoldBump> hs =
      manifold_bump_ensemble(atlas.manifold(), cfg.int_or("compare.n_h", 20), cfg.seed());

  std::string dir = outdir_for(cfg);
  SummaryWriter sum(dir + "/summary.txt", cfg.hash(), cfg.seed());
  sum.kv("experiment", "nonuniqueness");
  sum.kv("germ", mg.label());

  double threshold = cfg.num_or("compare.separation", 1e-3);
  bool separated = false;
  for (int attempt = 0; attempt < 3 && !separated; ++attempt) {
    int va = 2 * attempt, vb = 2 * attempt + 1;
    GlobalOptions oa = opts;
    oa.seed = opts.seed + static_cast<std::uint64_t>(97 * attempt);
    GlobalReconstruction ra =
        global_reconstruct(mg, atlas, build_pou(atlas, va), oa, spec);
    GlobalReconstruction rb =
        global_reconstruct(mg, atlas, build_pou(atlas, vb), oa, spec);
    double worst = 0.0;
    for (const ManifoldBump& h : hs) worst = std::max(worst, std::abs(ra(h) - rb(h)));
    sum.kv("pou_pair_" + std::to_string(va) + "_" + std::to_string(vb) + "_max_diff", worst);
    if (worst > threshold) separated = true;
  }
  sum.check("assemblies_separated", separated);
  res.outputs.push_back(sum.path());
  res.message = separated ? "nonuniqueness: assemblies separated" : "nonuniqueness: no separation";
  return separated ? 0 : 1;
}

int run_demo_impl(const ExperimentConfig& cfg, RunResult& res) {
  std::string name = cfg.get("demo.name");
  if (name == "nonuniqueness-core") return run_nonuniqueness(cfg, res);
  fail_config("unknown demo scenario: " + name);
}

std::map<std::string, std::vector<std::string>> demo_steps() {
  // each step: a config text; demos chain steps into subdirectories
  std::map<std::string, std::vector<std::string>> d;
  d["constant-circle"] = {
      "experiment.kind = coherence\ndomain.kind = circle\natlas.kind = two-arc\n"
      "germ.kind = constant\ngerm.density = cos\nscan.m_min = 3\nscan.m_max = 8\nscan.seed = 1\n",
      "experiment.kind = glue\natlas.kind = two-arc\ngerm.kind = constant\ngerm.density = cos\n"
      "glue.locals = density\nscan.seed = 1\n"};
  d["taylor-line"] = {
      "experiment.kind = coherence\ndomain.kind = box\ndomain.lo = -2\ndomain.hi = 2\n"
      "germ.kind = taylor\ngerm.g = sin\ngerm.k = 2\nscan.k_lo = -0.5\nscan.k_hi = 0.5\n"
      "scan.m_min = 3\nscan.m_max = 10\nscan.seed = 1\n",
      "experiment.kind = enhanced\ndomain.kind = box\ndomain.lo = -2\ndomain.hi = 2\n"
      "germ.kind = taylor\ngerm.g = sin\ngerm.k = 2\nscan.k_lo = -0.5\nscan.k_hi = 0.5\n"
      "scan.m_min = 3\nscan.m_max = 8\nscan.n_psi = 40\nscan.seed = 1\n",
      "experiment.kind = reconstruct\ndomain.kind = box\ndomain.lo = -2\ndomain.hi = 2\n"
      "germ.kind = taylor\ngerm.g = sin\ngerm.k = 2\nscan.k_lo = -0.5\nscan.k_hi = 0.5\n"
      "scan.m_min = 3\nscan.m_max = 8\nscan.seed = 1\n",
      "experiment.kind = residual\ndomain.kind = box\ndomain.lo = -2\ndomain.hi = 2\n"
      "germ.kind = taylor\ngerm.g = sin\ngerm.k = 2\nscan.k_lo = -0.5\nscan.k_hi = 0.5\n"
      "scan.m_min = 3\nscan.m_max = 6\nscan.n_pairs_per_stratum = 2\nscan.seed = 1\n"};
  d["young-circle"] = {
      "experiment.kind = coherence\ndomain.kind = circle\natlas.kind = two-arc\n"
      "germ.kind = young\ngerm.beta_g = 0.7\ngerm.a = 0.4\nscan.m_min = 3\nscan.m_max = 10\n"
      "scan.seed = 1\n",
      "experiment.kind = homogeneity\ndomain.kind = circle\natlas.kind = two-arc\n"
      "germ.kind = young\ngerm.beta_g = 0.7\ngerm.a = 0.4\nscan.m_min = 3\nscan.m_max = 10\n"
      "scan.seed = 1\n"};
  d["atlas-independence"] = {
      "experiment.kind = atlas-compare\natlas.kind = two-arc\ncompare.with = three-arc\n"
      "germ.kind = taylor\ngerm.g = cos\ngerm.k = 2\ncompare.n_h = 6\nscan.seed = 1\n"};
  d["nonuniqueness"] = {
      "experiment.kind = demo\ndemo.name = nonuniqueness-core\natlas.kind = two-arc\n"
      "germ.kind = young\ngerm.beta_g = 0.7\ngerm.a = 0.4\ncompare.n_h = 12\nscan.seed = 1\n"};
  return d;
}

}  // namespace

std::string demo_config_text(const std::string& name) {
  auto steps = demo_steps();
  auto it = steps.find(name);
  if (it == steps.end()) fail_config("unknown demo: " + name);
  std::string joined;
  for (const std::string& s : it->second) joined += s + "\n---\n";
  return joined;
}

RunResult run_demo(const std::string& name, const std::string& outdir) {
  RunResult total;
  auto steps = demo_steps();
  auto it = steps.find(name);
  if (it == steps.end()) {
    total.exit_code = 2;
    total.message = "unknown demo: " + name;
    return total;
  }
  int step_idx = 0;
  for (const std::string& text : it->second) {
    std::string step_dir = outdir + "/" + name + "/step" + std::to_string(step_idx++);
    ExperimentConfig cfg =
        ExperimentConfig::from_text(text + "output.dir = " + step_dir + "\n");
    RunResult r = run_experiment(cfg);
    total.outputs.insert(total.outputs.end(), r.outputs.begin(), r.outputs.end());
    total.exit_code = std::max(total.exit_code, r.exit_code);
    total.message += (total.message.empty() ? "" : "; ") + r.message;
  }
  return total;
}

}  // namespace germlab
