#include "germlab/germ.hpp"

#include <cmath>

#include "germlab/error.hpp"

namespace germlab {

Germ make_constant(const PairingOracle& t, const std::string& label) {
  Germ g(t.domain(), [t](const Vec&) { return t; }, label);
  g.nominal_gamma = std::numeric_limits<double>::infinity();
  g.nominal_alpha = 0.0;
  return g;
}

Germ make_taylor(const SmoothFunction& g, int k, const OpenSetDomain& domain) {
  if (k < 0) fail_config("taylor germ needs k >= 0");
  if (g.analytic_order() < k + 1)
    fail_config("taylor germ needs analytic derivatives of g up to order k+1");
  if (domain.dim() != 1) fail_config("taylor germs are built on one-dimensional domains");
  SmoothFunction gc = g;
  Germ out(
      domain,
      [gc, k, domain](const Vec& p) {
        // Coefficients of the Taylor polynomial around p, in powers of (y - p).
        std::vector<double> c(static_cast<std::size_t>(k) + 1);
        double fact = 1.0;
        for (int j = 0; j <= k; ++j) {
          if (j > 0) fact *= j;
          c[static_cast<std::size_t>(j)] = gc.derivative1(p[0], j) / fact;
        }
        double x0 = p[0];
        SmoothFunction density = SmoothFunction::custom(
            [c, x0](const Vec& y) {
              double t = y[0] - x0;
              double v = 0.0;
              for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
              return v;
            },
            "taylor-polynomial");
        return PairingOracle::smooth_density(std::move(density), domain);
      },
      "taylor(" + g.label() + ",k=" + std::to_string(k) + ")");
  out.nominal_gamma = k + 1.0;
  out.nominal_alpha = 0.0;
  return out;
}

Germ make_young(const SmoothFunction& g, double beta_g, double a, int J,
                const OpenSetDomain& domain) {
  if (!(beta_g > 0.0 && beta_g < 1.0)) fail_config("young germ needs beta_g in (0,1)");
  if (!(a > 0.0 && a < 1.0)) fail_config("young germ needs a in (0,1)");
  PairingOracle xi = PairingOracle::lacunary_series(a, J, /*derivative=*/true, domain);
  SmoothFunction gc = g;
  Germ out(
      domain, [gc, xi](const Vec& p) { return xi.scaled_by(gc.value(p)); },
      "young(beta_g=" + std::to_string(beta_g) + ",a=" + std::to_string(a) + ")");
  out.nominal_gamma = beta_g + a - 1.0;
  out.nominal_alpha = a - 1.0;
  out.nominal_beta = a - 1.0;
  return out;
}

Germ germ_linear_combination(std::vector<std::pair<double, Germ>> parts,
                             const std::string& label) {
  if (parts.empty()) fail_config("empty germ combination");
  OpenSetDomain dom = parts.front().second.domain();
  auto shared = std::make_shared<std::vector<std::pair<double, Germ>>>(std::move(parts));
  return Germ(
      dom,
      [shared](const Vec& p) {
        std::vector<std::pair<double, PairingOracle>> oracles;
        oracles.reserve(shared->size());
        for (const auto& [c, f] : *shared) oracles.emplace_back(c, f.at(p));
        return PairingOracle::linear_combination(std::move(oracles));
      },
      label);
}

double germ_pair(const Germ& f, const Vec& p, const Integrand& test, const QuadratureSpec& spec,
                 PairFlags* flags) {
  return f.at(p).pair(test, spec, flags);
}

}  // namespace germlab
