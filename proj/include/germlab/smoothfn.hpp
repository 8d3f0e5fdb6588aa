#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "germlab/geometry.hpp"
#include "germlab/testfn.hpp"

namespace germlab {

/// Scalar field on R^d with analytic derivatives where the shape allows them.
/// The built-in shapes depend on a single coordinate axis; fields of several
/// variables are formed as scaled sums. `custom` wraps an arbitrary evaluator
/// (no derivatives), which is all a pairing needs.
class SmoothFunction {
 public:
  static SmoothFunction constant(double c);
  static SmoothFunction polynomial(std::vector<double> coeffs, int axis = 0);
  /// sin(freq * y_axis + phase)
  static SmoothFunction sine(double freq, double phase = 0.0, int axis = 0);
  static SmoothFunction cosine(double freq, double phase = 0.0, int axis = 0);
  /// W_beta(y) = sum_{j=0}^{J} 2^{-j beta} cos(2^j y_axis); Hoelder exponent beta.
  static SmoothFunction lacunary(double beta, int J, int axis = 0);
  static SmoothFunction custom(std::function<double(const Vec&)> fn, std::string label);
  static SmoothFunction scaled_sum(std::vector<std::pair<double, SmoothFunction>> parts);
  /// factor * f((x - offset)/scale), componentwise affine; keeps analytic
  /// derivatives and the oscillation hint of the inner shape.
  static SmoothFunction affine_image(const SmoothFunction& f, const Vec& scale, const Vec& offset,
                                     double factor);

  double value(const Vec& y) const;
  /// Analytic partial derivative; configuration error for `custom` shapes or
  /// differentiation orders the shape cannot provide.
  double derivative(const Vec& y, const MultiIndex& k) const;
  /// 1-d convenience: m-th derivative along the bound axis.
  double derivative1(double y, int m) const;

  int analytic_order() const;
  /// Largest angular frequency carried by the shape (panel adaptation hint).
  double osc_freq() const;
  const std::string& label() const;

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
};

}  // namespace germlab
