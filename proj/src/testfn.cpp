#include "germlab/testfn.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "germlab/error.hpp"

namespace germlab {

namespace {

// ---------------------------------------------------------------------------
// dense polynomials in one variable, ascending coefficients
// ---------------------------------------------------------------------------
using Poly = std::vector<double>;

Poly poly_derive(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<double>(i));
  return d;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

double poly_eval(const Poly& p, double u) {
  double v = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * u + p[i];
  return v;
}

// Derivatives of the 1-d bump psi(u) = exp(-1/(1-u^2)) obey
//   psi^(k)(u) = psi(u) * N_k(u) / (1-u^2)^(2k)
// with N_0 = 1 and N_{k+1} = (1-u^2)^2 N_k' + (4k u (1-u^2) - 2u) N_k.
const Poly& bump_numerator(int k) {
  static std::vector<Poly> table;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (table.empty()) table.push_back(Poly{1.0});
  while (static_cast<int>(table.size()) <= k) {
    int m = static_cast<int>(table.size()) - 1;
    const Poly& n = table.back();
    Poly s2{1.0, 0.0, -2.0, 0.0, 1.0};               // (1-u^2)^2
    Poly lin{0.0, 4.0 * m, 0.0, -4.0 * m};           // 4m u (1-u^2)
    lin = poly_add(lin, Poly{0.0, -2.0});            // - 2u
    table.push_back(poly_add(poly_mul(s2, poly_derive(n)), poly_mul(lin, n)));
  }
  return table[static_cast<std::size_t>(k)];
}

constexpr int kBumpAnalyticOrder1D = 8;

double bump_value(const Vec& u) {
  double s = 1.0 - u.norm2();
  if (s <= 0.0) return 0.0;
  return std::exp(-1.0 / s);
}

// ---------------------------------------------------------------------------
// profiles
// ---------------------------------------------------------------------------

class BumpProfile final : public Profile {
 public:
  explicit BumpProfile(int dim) : dim_(dim) {}

  double radius() const override { return 1.0; }
  int analytic_order() const override { return dim_ == 1 ? kBumpAnalyticOrder1D : 1; }
  std::string describe() const override { return "standard-bump"; }

  double value(const Vec& u) const override { return bump_value(u); }

  double analytic_derivative(const Vec& u, const MultiIndex& k) const override {
    double s = 1.0 - u.norm2();
    if (s <= 0.0) return 0.0;
    double psi = std::exp(-1.0 / s);
    if (order(k) == 0) return psi;
    if (dim_ == 1) {
      double denom = std::pow(s, 2.0 * k[0]);
      return psi * poly_eval(bump_numerator(k[0]), u[0]) / denom;
    }
    // d = 2 gradient
    int axis = k[0] == 1 ? 0 : 1;
    return psi * (-2.0 * u[axis]) / (s * s);
  }

 private:
  int dim_;
};

class PolyBumpProfile final : public Profile {
 public:
  PolyBumpProfile(int dim, double c0, std::array<double, 2> c1, std::array<double, 2> c2)
      : dim_(dim), c0_(c0), c1_(c1), c2_(c2), bump_(dim) {}

  double radius() const override { return 1.0; }
  int analytic_order() const override { return bump_.analytic_order(); }
  std::string describe() const override { return "polynomial-times-bump"; }

  double poly(const Vec& u) const {
    double v = c0_;
    for (int i = 0; i < dim_; ++i)
      v += c1_[static_cast<std::size_t>(i)] * u[i] + c2_[static_cast<std::size_t>(i)] * u[i] * u[i];
    return v;
  }

  double value(const Vec& u) const override { return poly(u) * bump_.value(u); }

  double analytic_derivative(const Vec& u, const MultiIndex& k) const override {
    if (order(k) == 0) return value(u);
    if (dim_ == 1) {
      // Leibniz: (p psi)^(n) = sum_j C(n,j) p^(j) psi^(n-j); p is quadratic.
      int n = k[0];
      double p0 = poly(u);
      double p1 = c1_[0] + 2.0 * c2_[0] * u[0];
      double p2 = 2.0 * c2_[0];
      double binom = 1.0;
      double sum = 0.0;
      for (int j = 0; j <= std::min(n, 2); ++j) {
        double pj = j == 0 ? p0 : (j == 1 ? p1 : p2);
        sum += binom * pj * bump_.analytic_derivative(u, mi(n - j));
        binom = binom * (n - j) / (j + 1.0);
      }
      return sum;
    }
    // d = 2 gradient
    int axis = k[0] == 1 ? 0 : 1;
    double paxis = c1_[static_cast<std::size_t>(axis)] +
                   2.0 * c2_[static_cast<std::size_t>(axis)] * u[axis];
    return paxis * bump_.value(u) + poly(u) * bump_.analytic_derivative(u, k);
  }

 private:
  int dim_;
  double c0_;
  std::array<double, 2> c1_, c2_;
  BumpProfile bump_;
};

// Convolution (a * b)(u) = int a(u - v) b(v) dv, evaluated by composite
// quadrature over supp(b). Evaluations are pure functions of (u, k) and are
// memoised under a shared mutex; cached values equal recomputed ones exactly,
// so results do not depend on evaluation order or thread count.
class ConvProfile final : public Profile {
 public:
  ConvProfile(TestFunction a, TestFunction b)
      : a_(std::move(a)), b_(std::move(b)), dim_(a_.dim()) {
    Box sa = a_.support();
    Box sb = b_.support();
    radius_ = 0.0;
    for (int i = 0; i < dim_; ++i) {
      radius_ = std::max(radius_, std::max(std::abs(sa.lo[static_cast<std::size_t>(i)]),
                                           std::abs(sa.hi[static_cast<std::size_t>(i)])) +
                                      std::max(std::abs(sb.lo[static_cast<std::size_t>(i)]),
                                               std::abs(sb.hi[static_cast<std::size_t>(i)])));
    }
    // per-term panel counts: each factor scale must be resolved
    min_len_a_ = 1e300;
    feature_ = 1e300;
    for (const TestTerm& t : a_.terms()) {
      min_len_a_ = std::min(min_len_a_, 2.0 * t.scale * t.profile->radius());
      feature_ = std::min(feature_, t.scale * t.profile->feature_scale());
    }
    for (const TestTerm& t : b_.terms())
      feature_ = std::min(feature_, t.scale * t.profile->feature_scale());
  }

  double feature_scale() const override { return feature_; }

  double radius() const override { return radius_; }
  int analytic_order() const override { return a_.derivative_order_available(); }
  std::string describe() const override { return "convolution"; }

  double value(const Vec& u) const override { return cached(u, mi(0)); }

  double analytic_derivative(const Vec& u, const MultiIndex& k) const override {
    return cached(u, k);
  }

 private:
  struct Key {
    std::uint64_t u0, u1;
    int k0, k1;
    bool operator==(const Key& o) const {
      return u0 == o.u0 && u1 == o.u1 && k0 == o.k0 && k1 == o.k1;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.u0 * 0x9e3779b97f4a7c15ULL;
      h ^= k.u1 + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h ^= (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.k0)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.k1));
      return static_cast<std::size_t>(h);
    }
  };

  static std::uint64_t bits(double x) {
    std::uint64_t b;
    static_assert(sizeof(b) == sizeof(x));
    std::memcpy(&b, &x, sizeof(b));
    return b;
  }

  double compute(const Vec& u, const MultiIndex& k) const {
    if (std::abs(u.norm()) > radius_) return 0.0;
    // integrate term by term in each placement's own coordinates, so every
    // scale in b is resolved regardless of the overall support size
    double total = 0.0;
    for (const TestTerm& t : b_.terms()) {
      double r = t.profile->radius();
      double len = 2.0 * r * t.scale;
      int panels = std::max(16, static_cast<int>(std::ceil(24.0 * len / min_len_a_)));
      const Rule1D& rule = unit_rule(panels, 16);
      double sum = 0.0;
      if (dim_ == 1) {
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
          double w = rule.nodes[i] * r;
          double pv = t.profile->value(vec1(w));
          if (pv == 0.0) continue;
          Vec v = vec1(t.center[0] + t.scale * w);
          double av = order(k) == 0 ? a_.value(u - v) : a_.derivative(u - v, k);
          sum += rule.weights[i] * pv * av;
        }
        sum *= r;
      } else {
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
          double w0 = rule.nodes[i] * r;
          double row = 0.0;
          for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            double w1 = rule.nodes[j] * r;
            double pv = t.profile->value(vec2(w0, w1));
            if (pv == 0.0) continue;
            Vec v = vec2(t.center[0] + t.scale * w0, t.center[1] + t.scale * w1);
            double av = order(k) == 0 ? a_.value(u - v) : a_.derivative(u - v, k);
            row += rule.weights[j] * pv * av;
          }
          sum += rule.weights[i] * row;
        }
        sum *= r * r;
      }
      total += t.coeff * sum;
    }
    return total;
  }

  double cached(const Vec& u, const MultiIndex& k) const {
    Key key{bits(u[0]), dim_ > 1 ? bits(u[1]) : 0, k[0], k[1]};
    {
      std::shared_lock lock(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    double v = compute(u, k);
    std::unique_lock lock(mu_);
    memo_.emplace(key, v);
    return v;
  }

  TestFunction a_, b_;
  int dim_;
  double radius_;
  double min_len_a_;
  double feature_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<Key, double, KeyHash> memo_;
};

// order-4 central stencils for the m-th derivative (Fornberg coefficients)
struct Stencil {
  int half;                      // offsets run over [-half, half]
  std::array<double, 7> coeff;   // divided by h^m
};

const Stencil& fd_stencil(int m) {
  static const Stencil table[4] = {
      {2, {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12, 0, 0}},
      {2, {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12, 0, 0}},
      {3, {1.0 / 8, -1.0, 13.0 / 8, 0.0, -13.0 / 8, 1.0, -1.0 / 8}},
      {3, {-1.0 / 6, 2.0, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6}},
  };
  if (m < 1 || m > 4) fail_domain("finite differences support derivative orders 1..4");
  return table[m - 1];
}

constexpr double kFdStep = 1e-5;

}  // namespace

double Profile::derivative(const Vec& u, const MultiIndex& k) const {
  if (order(k) == 0) return value(u);
  if (order(k) <= analytic_order()) return analytic_derivative(u, k);
  // Finite differences along one axis at a time, on the unit-scale profile.
  int axis = k[0] > 0 ? 0 : 1;
  int m = axis == 0 ? k[0] : k[1];
  MultiIndex rest = k;
  rest[static_cast<std::size_t>(axis)] = 0;
  if (m > 4) fail_domain("derivative order beyond finite-difference fallback (max 4 per axis)");
  const Stencil& st = fd_stencil(m);
  double h = kFdStep;
  double acc = 0.0;
  for (int j = -st.half; j <= st.half; ++j) {
    double c = st.coeff[static_cast<std::size_t>(j + st.half)];
    if (c == 0.0) continue;
    Vec shifted = u;
    shifted[axis] += j * h;
    acc += c * (order(rest) == 0 ? value(shifted) : derivative(shifted, rest));
  }
  return acc / std::pow(h, m);
}

TestFunction TestFunction::standard_bump(int dim) {
  TestFunction f(dim);
  f.terms_.push_back(TestTerm{1.0, zero_vec(dim), 1.0, std::make_shared<BumpProfile>(dim)});
  return f;
}

TestFunction TestFunction::poly_bump(int dim, double c0, std::array<double, 2> c1,
                                     std::array<double, 2> c2) {
  TestFunction f(dim);
  f.terms_.push_back(
      TestTerm{1.0, zero_vec(dim), 1.0, std::make_shared<PolyBumpProfile>(dim, c0, c1, c2)});
  return f;
}

TestFunction TestFunction::from_profile(std::shared_ptr<const Profile> p, int dim) {
  TestFunction f(dim);
  f.terms_.push_back(TestTerm{1.0, zero_vec(dim), 1.0, std::move(p)});
  return f;
}

TestFunction TestFunction::linear_combination(
    const std::vector<std::pair<double, TestFunction>>& parts) {
  if (parts.empty()) fail_domain("empty linear combination");
  TestFunction f(parts.front().second.dim());
  for (const auto& [c, g] : parts) {
    if (g.dim() != f.dim_) fail_domain("dimension mismatch in linear combination");
    if (c == 0.0) continue;
    for (const TestTerm& t : g.terms_) {
      TestTerm s = t;
      s.coeff *= c;
      f.terms_.push_back(s);
    }
  }
  return f;
}

int TestFunction::derivative_order_available() const {
  int m = 1 << 20;
  for (const TestTerm& t : terms_) m = std::min(m, t.profile->analytic_order());
  return terms_.empty() ? 0 : m;
}

double TestFunction::value(const Vec& y) const {
  double v = 0.0;
  for (const TestTerm& t : terms_) {
    Vec u = (y - t.center) * (1.0 / t.scale);
    if (u.norm2() >= t.profile->radius() * t.profile->radius()) continue;
    v += t.coeff * std::pow(t.scale, -dim_) * t.profile->value(u);
  }
  return v;
}

double TestFunction::derivative(const Vec& y, const MultiIndex& k) const {
  double v = 0.0;
  for (const TestTerm& t : terms_) {
    Vec u = (y - t.center) * (1.0 / t.scale);
    if (u.norm2() >= t.profile->radius() * t.profile->radius()) continue;
    v += t.coeff * std::pow(t.scale, -order(k) - dim_) * t.profile->derivative(u, k);
  }
  return v;
}

Box TestFunction::support() const {
  if (terms_.empty()) return Box::ball_box(zero_vec(dim_), 0.0);
  Box b = terms_.front().support();
  for (std::size_t i = 1; i < terms_.size(); ++i) {
    Box s = terms_[i].support();
    for (int a = 0; a < dim_; ++a) {
      b.lo[static_cast<std::size_t>(a)] = std::min(b.lo[static_cast<std::size_t>(a)], s.lo[static_cast<std::size_t>(a)]);
      b.hi[static_cast<std::size_t>(a)] = std::max(b.hi[static_cast<std::size_t>(a)], s.hi[static_cast<std::size_t>(a)]);
    }
  }
  return b;
}

TestFunction TestFunction::scaled_by(double c) const {
  return linear_combination({{c, *this}});
}

TestFunction rescale(const TestFunction& f, const Vec& x, double lambda) {
  if (!(lambda > 0.0)) fail_domain("rescale requires a positive scale");
  if (x.dim != f.dim()) fail_domain("rescale center has wrong dimension");
  TestFunction g(f.dim());
  for (const TestTerm& t : f.terms()) {
    TestTerm s = t;
    s.center = x + t.center * lambda;
    s.scale = lambda * t.scale;
    g.terms_.push_back(s);
  }
  return g;
}

TestFunction convolve(const TestFunction& a, const TestFunction& b) {
  if (a.dim() != b.dim()) fail_domain("dimension mismatch in convolution");
  TestFunction f(a.dim());
  f.terms_.push_back(TestTerm{1.0, zero_vec(a.dim()), 1.0, std::make_shared<ConvProfile>(a, b)});
  return f;
}

double integral(const TestFunction& f, const QuadratureSpec& spec) {
  // Term by term in unit coordinates: int c s^{-d} prof((y-x)/s) dy = c int prof(u) du,
  // with the panel count taken from the scaled support length.
  double total = 0.0;
  for (const TestTerm& t : f.terms()) {
    double r = t.profile->radius();
    int panels = panel_count(spec, 2.0 * r * t.scale);
    const Rule1D& rule = unit_rule(panels, spec.nodes_per_panel);
    const Profile& prof = *t.profile;
    double s = 0.0;
    if (f.dim() == 1) {
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] * prof.value(vec1(rule.nodes[i] * r));
      s *= r;
    } else {
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j)
          row += rule.weights[j] * prof.value(vec2(rule.nodes[i] * r, rule.nodes[j] * r));
        s += rule.weights[i] * row;
      }
      s *= r * r;
    }
    total += t.coeff * s;
  }
  return total;
}

double cr_norm(const TestFunction& f, int r, int grid_per_axis) {
  if (r < 0) fail_domain("cr_norm requires r >= 0");
  if (f.is_zero()) return 0.0;
  if (grid_per_axis <= 0) grid_per_axis = f.dim() == 1 ? 10001 : 129;
  Box s = f.support();
  double worst = 0.0;
  std::vector<MultiIndex> idx;
  for (int k0 = 0; k0 <= r; ++k0) {
    if (f.dim() == 1) {
      idx.push_back(mi(k0));
    } else {
      for (int k1 = 0; k0 + k1 <= r; ++k1) idx.push_back(mi(k0, k1));
    }
  }
  auto at = [&](int i, int axis) {
    return s.lo[static_cast<std::size_t>(axis)] +
           s.width(axis) * static_cast<double>(i) / (grid_per_axis - 1);
  };
  if (f.dim() == 1) {
    for (int i = 0; i < grid_per_axis; ++i) {
      Vec y = vec1(at(i, 0));
      for (const MultiIndex& k : idx) worst = std::max(worst, std::abs(f.derivative(y, k)));
    }
  } else {
    for (int i = 0; i < grid_per_axis; ++i) {
      for (int j = 0; j < grid_per_axis; ++j) {
        Vec y = vec2(at(i, 0), at(j, 1));
        for (const MultiIndex& k : idx) worst = std::max(worst, std::abs(f.derivative(y, k)));
      }
    }
  }
  return worst;
}

}  // namespace germlab
