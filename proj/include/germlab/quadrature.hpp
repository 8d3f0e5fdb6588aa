#pragma once

#include <functional>
#include <vector>

#include "germlab/geometry.hpp"

namespace germlab {

/// Composite Gauss-Legendre quadrature parameters. All pairings, norms and
/// mollifier integrals in the library run through rules derived from one of
/// these. `panels_per_unit` and `min_panels` are powers of two so that the
/// panel-doubling convergence check refines every rule.
struct QuadratureSpec {
  int panels_per_unit = 64;  // panels per unit of support length, per axis
  int nodes_per_panel = 16;
  int min_panels = 16;        // floor, so tiny supports keep full relative accuracy
  double absolute_tolerance = 1e-9;

  QuadratureSpec refined(int factor = 2) const {
    QuadratureSpec q = *this;
    q.panels_per_unit *= factor;
    q.min_panels *= factor;
    return q;
  }
};

/// Gauss-Legendre nodes/weights on [-1, 1], cached per node count.
const std::vector<double>& gl_nodes(int n);
const std::vector<double>& gl_weights(int n);

/// Panel count for an interval of the given length. `osc_freq` is the largest
/// angular frequency of the integrand; panels are added so each one sees a
/// bounded phase.
int panel_count(const QuadratureSpec& spec, double length, double osc_freq = 0.0);

/// Composite rule on [a, b].
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule1D make_rule(const QuadratureSpec& spec, double a, double b, double osc_freq = 0.0);

/// Canonical composite rule on [-1, 1] with an explicit panel count, shared by
/// the scale-relative pairing path so that node coordinates are identical for
/// every (center, scale) placement. Cached and immutable once built.
const Rule1D& unit_rule(int n_panels, int nodes_per_panel);

/// Integrates a callable over a box (tensor-product rule in d = 2).
double integrate_box(const Box& box, const QuadratureSpec& spec,
                     const std::function<double(const Vec&)>& fn, double osc_freq = 0.0);

}  // namespace germlab
