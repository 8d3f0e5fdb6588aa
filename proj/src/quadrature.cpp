#include "germlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "germlab/error.hpp"

namespace germlab {

namespace {

struct GLRule {
  std::vector<double> nodes, weights;
};

// Newton iteration on Legendre polynomials; standard construction.
GLRule compute_gl(int n) {
  GLRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return r;
}

const GLRule& gl_rule(int n) {
  static std::map<int, GLRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

}  // namespace

const std::vector<double>& gl_nodes(int n) { return gl_rule(n).nodes; }
const std::vector<double>& gl_weights(int n) { return gl_rule(n).weights; }

int panel_count(const QuadratureSpec& spec, double length, double osc_freq) {
  if (length <= 0.0) return 0;
  double n = spec.min_panels;
  n = std::max(n, std::ceil(length * spec.panels_per_unit));
  if (osc_freq > 0.0) n = std::max(n, std::ceil(length * osc_freq / 6.0));
  if (n > 1e7) fail_domain("quadrature panel count exploded; integrand too oscillatory");
  return static_cast<int>(n);
}

Rule1D make_rule(const QuadratureSpec& spec, double a, double b, double osc_freq) {
  Rule1D r;
  if (b <= a) return r;
  int panels = panel_count(spec, b - a, osc_freq);
  const auto& xs = gl_nodes(spec.nodes_per_panel);
  const auto& ws = gl_weights(spec.nodes_per_panel);
  r.nodes.reserve(static_cast<std::size_t>(panels) * xs.size());
  r.weights.reserve(static_cast<std::size_t>(panels) * xs.size());
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double mid = a + (p + 0.5) * h;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      r.nodes.push_back(mid + 0.5 * h * xs[k]);
      r.weights.push_back(0.5 * h * ws[k]);
    }
  }
  return r;
}

const Rule1D& unit_rule(int n_panels, int nodes_per_panel) {
  static std::map<std::pair<int, int>, Rule1D> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n_panels, nodes_per_panel);
  auto it = cache.find(key);
  if (it == cache.end()) {
    QuadratureSpec s;
    s.min_panels = n_panels;
    s.panels_per_unit = 1;
    s.nodes_per_panel = nodes_per_panel;
    it = cache.emplace(key, make_rule(s, -1.0, 1.0)).first;
  }
  return it->second;
}

double integrate_box(const Box& box, const QuadratureSpec& spec,
                     const std::function<double(const Vec&)>& fn, double osc_freq) {
  if (box.empty()) return 0.0;
  if (box.dim == 1) {
    Rule1D r = make_rule(spec, box.lo[0], box.hi[0], osc_freq);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * fn(vec1(r.nodes[i]));
    return s;
  }
  Rule1D rx = make_rule(spec, box.lo[0], box.hi[0], osc_freq);
  Rule1D ry = make_rule(spec, box.lo[1], box.hi[1], osc_freq);
  double s = 0.0;
  for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < ry.nodes.size(); ++j)
      row += ry.weights[j] * fn(vec2(rx.nodes[i], ry.nodes[j]));
    s += rx.weights[i] * row;
  }
  return s;
}

}  // namespace germlab
