#include "germlab/smoothfn.hpp"

#include <cmath>

#include "germlab/error.hpp"

namespace germlab {

struct SmoothFunction::Node {
  enum class Kind { Constant, Polynomial, Sine, Lacunary, Custom, Sum, Affine } kind;
  int axis = 0;
  double c0 = 0.0;                    // constant value / sine frequency
  double phase = 0.0;
  double beta = 0.0;                  // lacunary exponent
  int truncation = 0;                 // lacunary J
  std::vector<double> coeffs;         // polynomial
  std::function<double(const Vec&)> fn;
  std::vector<std::pair<double, SmoothFunction>> parts;
  Vec aff_scale, aff_offset;   // affine wrapper
  double aff_factor = 1.0;
  std::string label;
};

namespace {

double poly_value(const std::vector<double>& c, double y) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * y + c[i];
  return v;
}

std::vector<double> poly_derivative(const std::vector<double>& c, int m) {
  std::vector<double> d = c;
  for (int pass = 0; pass < m; ++pass) {
    std::vector<double> n;
    for (std::size_t i = 1; i < d.size(); ++i) n.push_back(d[i] * static_cast<double>(i));
    d = std::move(n);
  }
  return d;
}

}  // namespace

SmoothFunction SmoothFunction::constant(double c) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->c0 = c;
  n->label = "constant";
  SmoothFunction f;
  f.node_ = n;
  return f;
}

SmoothFunction SmoothFunction::polynomial(std::vector<double> coeffs, int axis) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Polynomial;
  n->axis = axis;
  n->coeffs = std::move(coeffs);
  n->label = "polynomial";
  SmoothFunction f;
  f.node_ = n;
  return f;
}

SmoothFunction SmoothFunction::sine(double freq, double phase, int axis) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Sine;
  n->axis = axis;
  n->c0 = freq;
  n->phase = phase;
  n->label = "sine";
  SmoothFunction f;
  f.node_ = n;
  return f;
}

SmoothFunction SmoothFunction::cosine(double freq, double phase, int axis) {
  return sine(freq, phase + M_PI_2, axis);
}

SmoothFunction SmoothFunction::lacunary(double beta, int J, int axis) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Lacunary;
  n->axis = axis;
  n->beta = beta;
  n->truncation = J;
  n->label = "lacunary";
  SmoothFunction f;
  f.node_ = n;
  return f;
}

SmoothFunction SmoothFunction::custom(std::function<double(const Vec&)> fn, std::string label) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Custom;
  n->fn = std::move(fn);
  n->label = std::move(label);
  SmoothFunction f;
  f.node_ = n;
  return f;
}

SmoothFunction SmoothFunction::scaled_sum(std::vector<std::pair<double, SmoothFunction>> parts) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Sum;
  n->parts = std::move(parts);
  n->label = "sum";
  SmoothFunction f;
  f.node_ = n;
  return f;
}

SmoothFunction SmoothFunction::affine_image(const SmoothFunction& f, const Vec& scale,
                                             const Vec& offset, double factor) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Affine;
  n->parts.emplace_back(1.0, f);
  n->aff_scale = scale;
  n->aff_offset = offset;
  n->aff_factor = factor;
  n->label = "affine(" + f.label() + ")";
  SmoothFunction g;
  g.node_ = n;
  return g;
}

double SmoothFunction::value(const Vec& y) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Constant: return n.c0;
    case Node::Kind::Polynomial: return poly_value(n.coeffs, y[n.axis]);
    case Node::Kind::Sine: return std::sin(n.c0 * y[n.axis] + n.phase);
    case Node::Kind::Lacunary: {
      double s = 0.0;
      for (int j = 0; j <= n.truncation; ++j)
        s += std::pow(2.0, -j * n.beta) * std::cos(std::ldexp(1.0, j) * y[n.axis]);
      return s;
    }
    case Node::Kind::Custom: return n.fn(y);
    case Node::Kind::Sum: {
      double s = 0.0;
      for (const auto& [c, g] : n.parts) s += c * g.value(y);
      return s;
    }
    case Node::Kind::Affine: {
      Vec x = y;
      for (int i = 0; i < y.dim; ++i) x[i] = (y[i] - n.aff_offset[i]) / n.aff_scale[i];
      return n.aff_factor * n.parts.front().second.value(x);
    }
  }
  return 0.0;
}

double SmoothFunction::derivative(const Vec& y, const MultiIndex& k) const {
  if (order(k) == 0) return value(y);
  const Node& n = *node_;
  if (n.kind == Node::Kind::Sum) {
    double s = 0.0;
    for (const auto& [c, g] : n.parts) s += c * g.derivative(y, k);
    return s;
  }
  if (n.kind == Node::Kind::Affine) {
    Vec x = y;
    double chain = n.aff_factor;
    for (int i = 0; i < y.dim; ++i) {
      x[i] = (y[i] - n.aff_offset[i]) / n.aff_scale[i];
      for (int rep = 0; rep < k[static_cast<std::size_t>(i)]; ++rep) chain /= n.aff_scale[i];
    }
    return chain * n.parts.front().second.derivative(x, k);
  }
  if (n.kind == Node::Kind::Custom)
    fail_config("smooth function '" + n.label + "' has no analytic derivatives");
  if (n.kind == Node::Kind::Constant) return 0.0;
  // Shapes depend on one axis only: any cross-derivative vanishes.
  int other = 1 - n.axis;
  if (k[static_cast<std::size_t>(other)] > 0) return 0.0;
  int m = k[static_cast<std::size_t>(n.axis)];
  double u = y[n.axis];
  switch (n.kind) {
    case Node::Kind::Polynomial: return poly_value(poly_derivative(n.coeffs, m), u);
    case Node::Kind::Sine:
      return std::pow(n.c0, m) * std::sin(n.c0 * u + n.phase + m * M_PI_2);
    case Node::Kind::Lacunary: {
      double s = 0.0;
      for (int j = 0; j <= n.truncation; ++j) {
        double om = std::ldexp(1.0, j);
        s += std::pow(2.0, -j * n.beta) * std::pow(om, m) * std::cos(om * u + m * M_PI_2);
      }
      return s;
    }
    default: break;
  }
  return 0.0;
}

double SmoothFunction::derivative1(double y, int m) const {
  MultiIndex k = mi(0);
  k[static_cast<std::size_t>(node_->axis)] = m;
  Vec p = zero_vec(2);
  p.dim = 2;
  p[node_->axis] = y;
  if (node_->axis == 0) return derivative(vec1(y), mi(m));
  return derivative(p, k);
}

int SmoothFunction::analytic_order() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Custom: return 0;
    case Node::Kind::Affine:
    case Node::Kind::Sum: {
      int m = 1 << 20;
      for (const auto& [c, g] : n.parts) {
        (void)c;
        m = std::min(m, g.analytic_order());
      }
      return m;
    }
    default: return 1 << 20;
  }
}

double SmoothFunction::osc_freq() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Sine: return std::abs(n.c0);
    case Node::Kind::Lacunary: return std::ldexp(1.0, n.truncation);
    case Node::Kind::Affine: {
      double smin = std::abs(n.aff_scale[0]);
      for (int i = 1; i < n.aff_scale.dim; ++i) smin = std::min(smin, std::abs(n.aff_scale[i]));
      return n.parts.front().second.osc_freq() / smin;
    }
    case Node::Kind::Sum: {
      double w = 0.0;
      for (const auto& [c, g] : n.parts) {
        (void)c;
        w = std::max(w, g.osc_freq());
      }
      return w;
    }
    default: return 0.0;
  }
}

const std::string& SmoothFunction::label() const { return node_->label; }

}  // namespace germlab
