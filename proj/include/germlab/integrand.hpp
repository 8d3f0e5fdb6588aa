#pragma once

#include <functional>
#include <utility>

#include "germlab/geometry.hpp"

namespace germlab {

/// Anything a distribution can be paired with: an evaluator plus a compact
/// support box. `osc_freq` is the largest angular frequency the integrand
/// carries, used to adapt quadrature panels.
class Integrand {
 public:
  virtual ~Integrand() = default;
  virtual double value(const Vec& y) const = 0;
  virtual Box support() const = 0;
  virtual double osc_freq() const { return 0.0; }
};

class GenericIntegrand final : public Integrand {
 public:
  GenericIntegrand(std::function<double(const Vec&)> fn, Box support, double osc = 0.0)
      : fn_(std::move(fn)), support_(support), osc_(osc) {}

  double value(const Vec& y) const override { return fn_(y); }
  Box support() const override { return support_; }
  double osc_freq() const override { return osc_; }

 private:
  std::function<double(const Vec&)> fn_;
  Box support_;
  double osc_;
};

}  // namespace germlab
