#include "germlab/reconstruct.hpp"

#include <cmath>
#include <map>

#include "germlab/error.hpp"

namespace germlab {

namespace {

// z-nodes over the support of psi, one flat list per dimension case.
struct NodeSet {
  std::vector<Vec> nodes;
  std::vector<double> weights;
};

NodeSet psi_nodes(const Integrand& psi, const QuadratureSpec& spec) {
  NodeSet ns;
  Box s = psi.support();
  if (s.dim == 1) {
    Rule1D r = make_rule(spec, s.lo[0], s.hi[0], psi.osc_freq());
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      ns.nodes.push_back(vec1(r.nodes[i]));
      ns.weights.push_back(r.weights[i]);
    }
  } else {
    Rule1D rx = make_rule(spec, s.lo[0], s.hi[0], psi.osc_freq());
    Rule1D ry = make_rule(spec, s.lo[1], s.hi[1], psi.osc_freq());
    for (std::size_t i = 0; i < rx.nodes.size(); ++i)
      for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
        ns.nodes.push_back(vec2(rx.nodes[i], ry.nodes[j]));
        ns.weights.push_back(rx.weights[i] * ry.weights[j]);
      }
  }
  return ns;
}

}  // namespace

double reconstruct_stage(const Germ& germ, const MollifierFamily& m, const Integrand& psi, int n,
                         const QuadratureSpec& spec, ExecPolicy policy) {
  NodeSet ns = psi_nodes(psi, spec);
  double eps = m.eps(n);
  std::vector<double> contrib(ns.nodes.size());
  par_for(ns.nodes.size(), policy, [&](std::size_t i) {
    const Vec& z = ns.nodes[i];
    double pv = psi.value(z);
    if (pv == 0.0) {
      contrib[i] = 0.0;
      return;
    }
    contrib[i] = ns.weights[i] * pv * germ.at(z).pair(rescale(m.rho, z, eps), spec);
  });
  double sum = 0.0;  // serial reduction in node order keeps results thread-count independent
  for (double c : contrib) sum += c;
  return sum;
}

double reconstruct_stage_reference(const Germ& germ, const MollifierFamily& m,
                                   const Integrand& psi, int n, const QuadratureSpec& spec) {
  NodeSet ns = psi_nodes(psi, spec);
  double eps = m.eps(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < ns.nodes.size(); ++i) {
    const Vec& z = ns.nodes[i];
    sum += ns.weights[i] * psi.value(z) * germ.at(z).pair(rescale(m.rho, z, eps), spec);
  }
  return sum;
}

ReconstructResult reconstruct_local(const Germ& germ, const MollifierFamily& m,
                                    const Integrand& psi, int n_max, const QuadratureSpec& spec,
                                    ExecPolicy policy, double tol) {
  Box support = psi.support();
  if (!germ.domain().contains_box(support))
    fail_domain("reconstruction test function must be supported inside the domain");
  double margin = germ.domain().unbounded()
                      ? std::numeric_limits<double>::infinity()
                      : std::min(germ.domain().compact_margin(support),
                                 std::numeric_limits<double>::infinity());
  double kernel_radius = m.rho_support_radius();

  int n_start = kReconstructNMin;
  while (kernel_radius * m.eps(n_start) > margin && n_start < n_max) ++n_start;
  if (kernel_radius * m.eps(n_start) > margin)
    fail_domain("support margin too small for the mollification scales");

  ReconstructResult res;
  double prev = 0.0;
  double prev_inc = 0.0;
  bool have_prev = false;
  for (int n = n_start; n <= n_max; ++n) {
    double rn = reconstruct_stage(germ, m, psi, n, spec, policy);
    res.diag.stages.push_back(n);
    res.diag.values.push_back(rn);
    if (have_prev) {
      double inc = std::abs(rn - prev);
      if (prev_inc > 0.0) res.diag.increment_ratio = inc / prev_inc;
      if (inc < tol) {
        res.diag.converged = true;
        res.diag.n_star = n - 1;
        res.value = prev;  // first iterate whose successor moved less than tol
        // one-step Richardson extrapolation from the measured ratio
        double rho_rate = res.diag.increment_ratio;
        res.diag.richardson =
            (rho_rate > 0.0 && rho_rate < 1.0) ? rn + (rn - prev) * rho_rate / (1.0 - rho_rate) : rn;
        return res;
      }
      prev_inc = inc;
    }
    prev = rn;
    have_prev = true;
  }
  res.diag.converged = false;
  res.diag.n_star = n_max;
  res.value = prev;
  double rho_rate = res.diag.increment_ratio;
  res.diag.richardson =
      (rho_rate > 0.0 && rho_rate < 1.0) ? prev + prev_inc * rho_rate / (1.0 - rho_rate) : prev;
  return res;
}

int mollifier_order_for(const CoherenceReport& report) {
  if (report.exact) return 1;
  return std::max(1, static_cast<int>(std::ceil(-report.alpha_hat)) + 1);
}

ResidualReport residual_scan(const Germ& germ, const std::function<double(const Integrand&)>& rf,
                             const ScanGrid& grid, const TestFunction& h,
                             const QuadratureSpec& spec, ResidualLaw law, ExecPolicy policy) {
  ResidualReport rep;
  const std::size_t n = grid.points.size() * grid.lambdas.size();
  rep.rows.resize(n);
  // Rows are full reconstructions; parallelise across rows and keep each
  // row's internal kernel serial.
  par_for(n, policy, [&](std::size_t idx) {
    const Vec& p = grid.points[idx / grid.lambdas.size()];
    double lam = grid.lambdas[idx % grid.lambdas.size()];
    ResidualRow& row = rep.rows[idx];
    row.p = p;
    row.lambda = lam;
    TestFunction hlp = rescale(h, p, lam);
    double lhs = rf(hlp);
    double rhs = germ_pair(germ, p, hlp, spec);
    row.residual = std::abs(lhs - rhs);
  });

  std::map<double, double> env;
  for (const ResidualRow& r : rep.rows) {
    rep.max_residual = std::max(rep.max_residual, r.residual);
    if (r.residual > 1e-13) env[r.lambda] = std::max(env[r.lambda], r.residual);
  }
  if (env.size() < 3) {
    // residuals at or below noise everywhere; report a flat law
    rep.slope = 0.0;
    return rep;
  }
  if (law == ResidualLaw::PowerLaw) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, nn = 0;
    for (const auto& [lam, v] : env) {
      double x = std::log(lam), y = std::log(v);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      nn += 1;
    }
    rep.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, nn = 0;
    for (const auto& [lam, v] : env) {
      double x = 1.0 + std::abs(std::log(lam)), y = v;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      nn += 1;
    }
    rep.log_coeff = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    rep.log_intercept = (sy - rep.log_coeff * sx) / nn;
  }
  return rep;
}

}  // namespace germlab
