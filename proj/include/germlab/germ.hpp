#pragma once

#include <functional>
#include <optional>
#include <string>

#include "germlab/distribution.hpp"

namespace germlab {

/// A germ of distributions: an assignment p -> F_p over a base domain, with
/// nominal scaling exponents kept as metadata only (every experiment
/// re-estimates them). Evaluators are pure; repeated evaluation at the same
/// point yields oracles with identical pairings.
class Germ {
 public:
  Germ() = default;
  Germ(OpenSetDomain domain, std::function<PairingOracle(const Vec&)> at, std::string label)
      : domain_(std::move(domain)), at_(std::move(at)), label_(std::move(label)) {}

  const OpenSetDomain& domain() const { return domain_; }
  const std::string& label() const { return label_; }
  int dim() const { return domain_.dim(); }

  PairingOracle at(const Vec& p) const {
    if (!domain_.contains(p)) fail_domain("germ evaluated outside its base domain");
    return at_(p);
  }

  std::optional<double> nominal_gamma, nominal_alpha, nominal_beta;

 private:
  OpenSetDomain domain_ = OpenSetDomain::whole_space(1);
  std::function<PairingOracle(const Vec&)> at_;
  std::string label_;
};

/// F_p := t for every p; coherent with any parameters.
Germ make_constant(const PairingOracle& t, const std::string& label = "constant");

/// F_x := degree-k Taylor polynomial of g at x, as a smooth density.
/// Requires analytic derivatives of g up to order k+1.
Germ make_taylor(const SmoothFunction& g, int k, const OpenSetDomain& domain);

/// F_x := g(x) * xi with xi the truncated lacunary derivative of regularity
/// a - 1 < 0 and g of Hoelder exponent beta_g; a desk-scale negative-exponent
/// family (gamma = beta_g + a - 1).
Germ make_young(const SmoothFunction& g, double beta_g, double a, int J,
                const OpenSetDomain& domain);

/// Pointwise (in p) linear combination of germs on a common domain.
Germ germ_linear_combination(std::vector<std::pair<double, Germ>> parts,
                             const std::string& label = "combination");

/// F_p(f): the atomic evaluation every scan uses.
double germ_pair(const Germ& f, const Vec& p, const Integrand& test, const QuadratureSpec& spec,
                 PairFlags* flags = nullptr);

}  // namespace germlab
