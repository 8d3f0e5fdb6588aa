#pragma once

#include <memory>
#include <vector>

#include "germlab/integrand.hpp"
#include "germlab/smoothfn.hpp"
#include "germlab/testfn.hpp"

namespace germlab {

/// Diagnostics for a single pairing.
struct PairFlags {
  bool support_clipped = false;  // test-function support left the oracle's domain
};

/// Diffeomorphism descriptor: the evaluators a distribution transform needs.
/// `jac_det_forward`/`jac_det_inverse` are |det J phi|(x) and |det J phi^{-1}|(y).
struct Diffeo {
  int dim = 1;
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;
  std::function<double(const Vec&)> jac_det_forward;
  std::function<double(const Vec&)> jac_det_inverse;
  std::function<Box(const Box&)> map_box_forward;   // bounding box of the image
  std::function<Box(const Box&)> map_box_inverse;

  static Diffeo identity(int dim);
  /// y_i = scale_i * x_i + offset_i, scale_i != 0.
  static Diffeo affine(const Vec& scale, const Vec& offset);
  /// General map from evaluators; box mappers default to edge sampling.
  static Diffeo from_maps(int dim, std::function<Vec(const Vec&)> fwd,
                          std::function<Vec(const Vec&)> inv,
                          std::function<double(const Vec&)> det_fwd,
                          std::function<double(const Vec&)> det_inv);

  bool complete() const { return forward && inverse && jac_det_forward && jac_det_inverse; }
  Diffeo inverted() const;
  static Diffeo compose(const Diffeo& outer, const Diffeo& inner);  // outer after inner
};

/// h -> h o phi, with the support box transported through phi^{-1}.
GenericIntegrand compose_with(const Integrand& h, const Diffeo& phi);

/// A distribution presented as a pairing functional on an open set. Backings
/// cover densities, Dirac combs, truncated lacunary series (and its
/// distributional derivative), transported oracles and linear combinations.
/// Oracles are immutable; pairings are pure.
class PairingOracle {
 public:
  using Ptr = std::shared_ptr<const PairingOracle>;
  enum class Backing {
    SmoothDensity,
    IndicatorDensity,
    DiracComb,
    LacunarySeries,
    Pushforward,
    LinearCombination,
  };

  static PairingOracle smooth_density(SmoothFunction u, OpenSetDomain domain);
  static PairingOracle indicator_density(Box b, double value, OpenSetDomain domain);
  static PairingOracle dirac(const Vec& location, double weight, OpenSetDomain domain);
  static PairingOracle dirac_comb(std::vector<Vec> locations, std::vector<double> weights,
                                  OpenSetDomain domain);
  /// W_a (derivative = false) or W_a' (derivative = true) on axis 0, d = 1:
  ///   W_a(y) = sum_{j<=J} 2^{-ja} cos(2^j y),  W_a'(y) = -sum_{j<=J} 2^{j(1-a)} sin(2^j y).
  static PairingOracle lacunary_series(double a, int J, bool derivative, OpenSetDomain domain);
  static PairingOracle linear_combination(std::vector<std::pair<double, PairingOracle>> parts);
  static PairingOracle zero(OpenSetDomain domain);

  Backing backing() const { return backing_; }
  const OpenSetDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }

  /// T(f). Out-of-domain support extends the backing by zero and reports a
  /// diagnostic flag instead of failing.
  double pair(const Integrand& f, const QuadratureSpec& spec, PairFlags* flags = nullptr) const;

  PairingOracle scaled_by(double c) const;

 private:
  friend PairingOracle pushforward_chart(const PairingOracle&, const Diffeo&);
  PairingOracle() = default;

  Backing backing_ = Backing::SmoothDensity;
  OpenSetDomain domain_ = OpenSetDomain::whole_space(1);
  SmoothFunction density_ = SmoothFunction::constant(0.0);
  Box indicator_box_;
  double indicator_value_ = 0.0;
  std::vector<Vec> atoms_;
  std::vector<double> atom_weights_;
  double lac_a_ = 0.5;
  int lac_J_ = 12;
  bool lac_derivative_ = false;
  Ptr inner_;
  Diffeo map_;
  std::vector<std::pair<double, Ptr>> combo_;
};

/// (phi_* T)(h) := T(h o phi). Densities transform with the |det J phi^{-1}|
/// factor, Dirac atoms map through phi with unchanged weights; other backings
/// are wrapped. phi must supply forward, inverse and Jacobian evaluators.
PairingOracle pushforward_chart(const PairingOracle& t, const Diffeo& phi);

/// chi^* S := (chi^{-1})_* S.
PairingOracle pullback_chart(const PairingOracle& s, const Diffeo& chi);

}  // namespace germlab
