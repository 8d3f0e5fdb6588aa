#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "germlab/integrand.hpp"
#include "germlab/quadrature.hpp"

namespace germlab {

/// Partial-derivative multi-index; the second entry is ignored in d = 1.
using MultiIndex = std::array<int, 2>;

inline int order(const MultiIndex& k) { return k[0] + k[1]; }
inline MultiIndex mi(int k0, int k1 = 0) { return MultiIndex{k0, k1}; }

/// A unit-scale smooth compactly supported shape. Concrete profiles provide
/// analytic derivatives up to `analytic_order`; beyond that the base class
/// falls back to order-4 central finite differences with step 1e-5, applied
/// on the unit-scale representative.
class Profile {
 public:
  virtual ~Profile() = default;

  virtual double radius() const = 0;
  /// Width of the smallest internal feature (support diameter of the finest
  /// constituent); quadrature rules size their panels against it.
  virtual double feature_scale() const { return 2.0 * radius(); }
  virtual int analytic_order() const = 0;
  virtual double value(const Vec& u) const = 0;
  virtual double analytic_derivative(const Vec& u, const MultiIndex& k) const = 0;
  virtual std::string describe() const = 0;

  /// Derivative with finite-difference fallback above the analytic order.
  double derivative(const Vec& u, const MultiIndex& k) const;
};

/// One scaled placement of a profile: coeff * scale^{-d} * profile((y - center)/scale).
struct TestTerm {
  double coeff = 1.0;
  Vec center;
  double scale = 1.0;
  std::shared_ptr<const Profile> profile;

  double support_radius() const { return scale * profile->radius(); }
  Box support() const { return Box::ball_box(center, support_radius()); }
};

/// Smooth compactly supported test function, represented as an analytic
/// descriptor (a sum of scaled profile placements). Rescaling composes the
/// (center, scale) parameters algebraically, so nested rescalings lose no
/// precision; values are never sampled into arrays.
class TestFunction final : public Integrand {
 public:
  TestFunction() = default;
  explicit TestFunction(int dim) : dim_(dim) {}

  /// psi(u) = exp(-1/(1-|u|^2)) on the open unit ball, 0 outside.
  static TestFunction standard_bump(int dim);

  /// (c0 + sum_i c1[i] u_i + sum_i c2[i] u_i^2) * standard bump.
  static TestFunction poly_bump(int dim, double c0, std::array<double, 2> c1,
                                std::array<double, 2> c2);

  static TestFunction zero(int dim) { return TestFunction(dim); }

  static TestFunction from_profile(std::shared_ptr<const Profile> p, int dim);

  static TestFunction linear_combination(
      const std::vector<std::pair<double, TestFunction>>& parts);

  int dim() const { return dim_; }
  const std::vector<TestTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Largest analytic derivative order shared by all profiles.
  int derivative_order_available() const;

  double value(const Vec& y) const override;
  Box support() const override;

  double derivative(const Vec& y, const MultiIndex& k) const;

  TestFunction scaled_by(double c) const;

 private:
  int dim_ = 1;
  std::vector<TestTerm> terms_;
  friend TestFunction rescale(const TestFunction&, const Vec&, double);
  friend TestFunction convolve(const TestFunction&, const TestFunction&);
};

/// f^lambda_x(y) = lambda^{-d} f(lambda^{-1}(y - x)). Composes exactly on the
/// descriptor: each term's placement becomes (x + lambda*center, lambda*scale).
TestFunction rescale(const TestFunction& f, const Vec& x, double lambda);

/// Convolution a * b wrapped as a single-term test function. Values are
/// computed on demand by composite quadrature over the support of `b`
/// (memoised; evaluation is a pure function of the argument).
TestFunction convolve(const TestFunction& a, const TestFunction& b);

/// Composite quadrature of f over its support, term by term in the unit
/// coordinates of each placement.
double integral(const TestFunction& f, const QuadratureSpec& spec);

/// max over |k| <= r of sup |d^k f|, taken on a sampling grid over the
/// support (1e4 points in d = 1, 129 per axis in d = 2).
double cr_norm(const TestFunction& f, int r, int grid_per_axis = 0);

}  // namespace germlab
