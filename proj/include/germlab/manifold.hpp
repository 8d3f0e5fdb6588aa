#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "germlab/coherence.hpp"
#include "germlab/reconstruct.hpp"

namespace germlab {

/// Built-in manifolds: the circle S^1 and the flat torus T^2, points given by
/// angles in [0, 2pi) per axis; plus an open interval of the line as the
/// degenerate one-chart case. Transitions between the built-in angle charts
/// are affine, so all transport stays closed-form.
enum class ManifoldKind { Circle, Torus, Interval };

struct Manifold {
  ManifoldKind kind = ManifoldKind::Circle;
  int dim = 1;
  double interval_lo = 0.0, interval_hi = 1.0;  // Interval only

  static Manifold circle() { return Manifold{ManifoldKind::Circle, 1, 0, 0}; }
  static Manifold torus() { return Manifold{ManifoldKind::Torus, 2, 0, 0}; }
  static Manifold interval(double lo, double hi) {
    return Manifold{ManifoldKind::Interval, 1, lo, hi};
  }
  bool periodic() const { return kind != ManifoldKind::Interval; }
};

/// Canonical angle in [0, 2pi).
double wrap_angle(double theta);
/// Signed angular difference in (-pi, pi].
double angle_diff(double a, double b);

struct ArcInterval {
  double lo = 0.0, hi = 0.0;  // hi - lo < 2pi on periodic axes
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  /// Representative of theta inside (lo, hi), if one exists.
  std::optional<double> branch(double theta, bool periodic) const;
};

/// Coordinate patch: per-axis arcs and an affine coordinate
/// x_i = scale_i * t_i + offset_i on the branch representative t_i.
class Chart {
 public:
  Chart() = default;
  Chart(Manifold m, std::array<ArcInterval, 2> arcs, std::array<double, 2> scale,
        std::array<double, 2> offset, std::string label);

  const Manifold& manifold() const { return manifold_; }
  const std::string& label() const { return label_; }
  int dim() const { return manifold_.dim; }
  const ArcInterval& arc(int axis) const { return arcs_[static_cast<std::size_t>(axis)]; }
  double scale(int axis) const { return scale_[static_cast<std::size_t>(axis)]; }
  double offset(int axis) const { return offset_[static_cast<std::size_t>(axis)]; }
  /// Coordinate interval of an angular interval inside this chart's arc.
  ArcInterval coord_interval(int axis, const ArcInterval& branch_angles) const;
  bool angle_chart() const;  // identity coordinates (scale 1, offset 0)

  bool contains(const Vec& p) const;
  Vec to_coords(const Vec& p) const;
  Vec to_manifold(const Vec& x) const;
  Box image() const;
  double jac_det_to_manifold() const;  // |det d(to_manifold)/dx|

 private:
  Manifold manifold_;
  std::array<ArcInterval, 2> arcs_{};
  std::array<double, 2> scale_{1.0, 1.0};
  std::array<double, 2> offset_{0.0, 0.0};
  std::string label_;
};

class Atlas {
 public:
  Atlas() = default;
  Atlas(Manifold m, std::vector<Chart> charts, std::string label);

  const Manifold& manifold() const { return manifold_; }
  const std::vector<Chart>& charts() const { return charts_; }
  const std::string& label() const { return label_; }
  int size() const { return static_cast<int>(charts_.size()); }
  int dim() const { return manifold_.dim; }

  /// Components of phi_i(U_i cap U_j), as boxes in chart-i coordinates.
  std::vector<Box> overlap_components(int i, int j) const;

  /// Deterministic dense sample of the manifold (about n points).
  std::vector<Vec> sample_points(int n) const;

  /// Cover, chart round-trip and cocycle checks; construction error on failure.
  void validate(double tol = 1e-12) const;

 private:
  Manifold manifold_;
  std::vector<Chart> charts_;
  std::string label_;
};

/// tau_ij = phi_j o phi_i^{-1} with inverse and Jacobians; domain error if the
/// charts do not overlap.
Diffeo transition(const Atlas& atlas, int i, int j);

/// Affine restriction of tau_ij to one overlap component (probe at the box
/// centre; exact for the built-in charts).
Diffeo transition_on_component(const Atlas& atlas, int i, int j, const Box& component);

Atlas circle_two_arc_atlas();
Atlas circle_three_arc_atlas();
/// Two-arc atlas whose second chart uses a rescaled coordinate, for
/// coordinate-independence checks.
Atlas circle_two_arc_scaled_atlas(double second_scale = 1.7);
Atlas torus_four_patch_atlas();
Atlas interval_one_chart_atlas(double lo, double hi);

/// Smooth nonnegative weights subordinated to the cover, summing to one.
/// Weights are plateau bumps per chart (exactly zero in a margin strip inside
/// each patch); `variant` selects a different admissible taper/shrink profile.
class PartitionOfUnity {
 public:
  PartitionOfUnity() = default;
  PartitionOfUnity(const Atlas& atlas, int variant);

  int size() const { return static_cast<int>(raw_.size()); }
  int variant() const { return variant_; }
  const Atlas& atlas() const { return *atlas_; }
  double raw_weight(int j, const Vec& p) const;  // b_j(p)
  double weight(int j, const Vec& p) const;      // rho_j = b_j / sum_k b_k
  /// Angular support of b_j (per-axis interval inside the patch arc).
  std::array<ArcInterval, 2> weight_support(int j) const;

 private:
  struct AxisProfile {
    double lo = 0.0, hi = 0.0;    // support endpoints within the arc
    double taper_lo = 0.1, taper_hi = 0.1;
  };
  std::shared_ptr<const Atlas> atlas_;
  std::vector<std::array<AxisProfile, 2>> raw_;
  int variant_ = 0;
};

PartitionOfUnity build_pou(const Atlas& atlas, int variant = 0);

/// Smooth bump on the manifold: value ψ(angdist(p, center)/scale) per axis.
struct ManifoldBump {
  Vec center;
  double scale = 0.5;
  Manifold manifold;

  double value(const Vec& p) const;
};

/// Germ families on the manifold, defined through the angle representation so
/// their chart-local forms are consistent across all angle charts.
class ManifoldGerm {
 public:
  enum class Kind { Constant, Taylor, Young };

  static ManifoldGerm constant_density(const SmoothFunction& density, const Manifold& m,
                                       const std::string& label = "constant");
  static ManifoldGerm taylor(const SmoothFunction& g, int k, const Manifold& m);
  static ManifoldGerm young(double beta_g, double a, int J, const Manifold& m);

  Kind kind() const { return kind_; }
  const Manifold& manifold() const { return manifold_; }
  const std::string& label() const { return label_; }
  std::optional<double> nominal_gamma() const { return nominal_gamma_; }

  /// The chart-local germ x -> phi_*(F_{phi^{-1}(x)}) on the chart image.
  Germ chart_germ(const Chart& chart) const;

 private:
  Kind kind_ = Kind::Constant;
  Manifold manifold_;
  SmoothFunction field_ = SmoothFunction::constant(0.0);  // density (Constant) or g (Taylor/Young)
  int taylor_k_ = 0;
  double beta_g_ = 0.7, lac_a_ = 0.4;
  int lac_J_ = 12;
  std::optional<double> nominal_gamma_;
  std::string label_;
};

/// A chart-local distribution presented as a pairing evaluator.
using LocalDistribution = std::function<double(const Integrand&)>;

struct GlueRow {
  int chart_i = 0, chart_j = 0, g_id = 0;
  double lhs = 0.0, rhs = 0.0, abs_diff = 0.0;
};

struct GlueResult {
  bool pass = false;
  double tol = 0.0;
  double max_abs_diff = 0.0;
  GlueRow witness;
  std::vector<GlueRow> rows;
};

/// Verifies the overlap condition: for test functions g supported inside each
/// overlap component, pair(T_i, g) must match pair of the transported T_j.
GlueResult glue_check(const std::vector<LocalDistribution>& locals, const Atlas& atlas,
                      int bumps_per_overlap, std::uint64_t seed, double tol,
                      ExecPolicy policy = ExecPolicy::Parallel);

struct GlobalOptions {
  int n_max = kReconstructNMax;
  double glue_tol = 1e-5;
  int glue_bumps_per_overlap = 20;
  std::uint64_t seed = 1;
  /// Size of the admissible local-choice freedom exercised when gamma <= 0
  /// (a bounded smooth density added per chart; any such perturbation
  /// satisfies the reconstruction bound for nonpositive exponents).
  double choice_amplitude = 0.1;
  int scan_m_min = 3, scan_m_max = 8;
  int pairs_per_stratum = 8;
  std::optional<int> mollifier_order;
  bool run_glue = true;
};

/// The assembled global distribution RF(h) = sum_j T_j((rho_j h) o phi_j^{-1}).
class GlobalReconstruction {
 public:
  double operator()(const ManifoldBump& h) const;
  double chart_local(int j, const Integrand& g) const { return locals_[static_cast<std::size_t>(j)](g); }

  double gamma_hat() const { return gamma_hat_; }
  const std::vector<CoherenceReport>& chart_reports() const { return reports_; }
  const GlueResult& glue() const { return glue_; }
  const PartitionOfUnity& pou() const { return pou_; }
  int mollifier_order() const { return order_; }

 private:
  friend GlobalReconstruction global_reconstruct(const ManifoldGerm&, const Atlas&,
                                                 const PartitionOfUnity&, const GlobalOptions&,
                                                 const QuadratureSpec&, ExecPolicy);
  Atlas atlas_;
  PartitionOfUnity pou_;
  std::vector<LocalDistribution> locals_;
  std::vector<CoherenceReport> reports_;
  GlueResult glue_;
  double gamma_hat_ = 0.0;
  int order_ = 1;
  QuadratureSpec spec_;
  ExecPolicy policy_ = ExecPolicy::Parallel;
};

/// Per-chart reconstruction with fitted exponents; for gamma_hat > 0 the glue
/// check must pass before assembly (verification error otherwise), for
/// gamma_hat <= 0 assembly proceeds with a seeded admissible choice of locals
/// and no glue requirement.
GlobalReconstruction global_reconstruct(const ManifoldGerm& germ, const Atlas& atlas,
                                        const PartitionOfUnity& pou, const GlobalOptions& options,
                                        const QuadratureSpec& spec,
                                        ExecPolicy policy = ExecPolicy::Parallel);

struct CompareRow {
  int h_id = 0;
  double rf_a = 0.0, rf_b = 0.0, rel_diff = 0.0;
};

struct CompareResult {
  double max_rel_diff = 0.0;
  std::vector<CompareRow> rows;
};

/// max over a seeded ensemble of |RF_A(h) - RF_B(h)| / (1 + |RF_A(h)|).
CompareResult atlas_compare(const ManifoldGerm& germ, const Atlas& a, const Atlas& b, int n_h,
                            std::uint64_t seed, const GlobalOptions& options,
                            const QuadratureSpec& spec,
                            ExecPolicy policy = ExecPolicy::Parallel);

/// Seeded ensemble of manifold bumps.
std::vector<ManifoldBump> manifold_bump_ensemble(const Manifold& m, int n, std::uint64_t seed,
                                                 double min_scale = 0.15, double max_scale = 0.45);

/// Direct quadrature of a density (in angle coordinates) against a bump:
/// the manifold-side oracle for reconstruction checks.
double manifold_density_pairing(const SmoothFunction& density, const ManifoldBump& h,
                                const QuadratureSpec& spec);

}  // namespace germlab
