#include "germlab/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "germlab/error.hpp"
#include "germlab/rng.hpp"

namespace germlab {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

// smooth step: 0 for x <= 0, 1 for x >= 1
double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double a = std::exp(-1.0 / x);
  double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

double bump_shape(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

}  // namespace

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

double angle_diff(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d <= -M_PI) d += kTwoPi;
  if (d > M_PI) d -= kTwoPi;
  return d;
}

std::optional<double> ArcInterval::branch(double theta, bool periodic) const {
  if (!periodic) return (theta > lo && theta < hi) ? std::optional<double>(theta) : std::nullopt;
  double t = wrap_angle(theta);
  for (int k = -1; k <= 1; ++k) {
    double cand = t + k * kTwoPi;
    if (cand > lo && cand < hi) return cand;
  }
  return std::nullopt;
}

Chart::Chart(Manifold m, std::array<ArcInterval, 2> arcs, std::array<double, 2> scale,
             std::array<double, 2> offset, std::string label)
    : manifold_(m), arcs_(arcs), scale_(scale), offset_(offset), label_(std::move(label)) {
  for (int i = 0; i < m.dim; ++i) {
    const ArcInterval& a = arcs_[static_cast<std::size_t>(i)];
    if (a.width() <= 0.0) fail_construction("chart patch must have positive width");
    if (m.periodic() && a.width() >= kTwoPi)
      fail_construction("chart patch must be a proper arc (width < 2pi)");
    if (scale_[static_cast<std::size_t>(i)] == 0.0)
      fail_construction("chart coordinate scale must be nonzero");
  }
}

bool Chart::angle_chart() const {
  for (int i = 0; i < dim(); ++i)
    if (scale_[static_cast<std::size_t>(i)] != 1.0 || offset_[static_cast<std::size_t>(i)] != 0.0)
      return false;
  return true;
}

bool Chart::contains(const Vec& p) const {
  for (int i = 0; i < dim(); ++i)
    if (!arcs_[static_cast<std::size_t>(i)].branch(p[i], manifold_.periodic())) return false;
  return true;
}

Vec Chart::to_coords(const Vec& p) const {
  Vec x = zero_vec(dim());
  for (int i = 0; i < dim(); ++i) {
    auto t = arcs_[static_cast<std::size_t>(i)].branch(p[i], manifold_.periodic());
    if (!t) fail_domain("point outside chart patch");
    x[i] = scale_[static_cast<std::size_t>(i)] * *t + offset_[static_cast<std::size_t>(i)];
  }
  return x;
}

Vec Chart::to_manifold(const Vec& x) const {
  Vec p = zero_vec(dim());
  for (int i = 0; i < dim(); ++i) {
    double t = (x[i] - offset_[static_cast<std::size_t>(i)]) / scale_[static_cast<std::size_t>(i)];
    p[i] = manifold_.periodic() ? wrap_angle(t) : t;
  }
  return p;
}

Box Chart::image() const {
  Box b;
  b.dim = dim();
  for (int i = 0; i < dim(); ++i) {
    double a = scale_[static_cast<std::size_t>(i)] * arcs_[static_cast<std::size_t>(i)].lo +
               offset_[static_cast<std::size_t>(i)];
    double c = scale_[static_cast<std::size_t>(i)] * arcs_[static_cast<std::size_t>(i)].hi +
               offset_[static_cast<std::size_t>(i)];
    b.lo[static_cast<std::size_t>(i)] = std::min(a, c);
    b.hi[static_cast<std::size_t>(i)] = std::max(a, c);
  }
  return b;
}

double Chart::jac_det_to_manifold() const {
  double d = 1.0;
  for (int i = 0; i < dim(); ++i) d /= std::abs(scale_[static_cast<std::size_t>(i)]);
  return d;
}

ArcInterval Chart::coord_interval(int axis, const ArcInterval& branch_angles) const {
  double s = scale_[static_cast<std::size_t>(axis)];
  double b = offset_[static_cast<std::size_t>(axis)];
  double x0 = s * branch_angles.lo + b;
  double x1 = s * branch_angles.hi + b;
  return ArcInterval{std::min(x0, x1), std::max(x0, x1)};
}

Atlas::Atlas(Manifold m, std::vector<Chart> charts, std::string label)
    : manifold_(m), charts_(std::move(charts)), label_(std::move(label)) {
  if (charts_.empty()) fail_construction("atlas needs at least one chart");
}

std::vector<Box> Atlas::overlap_components(int i, int j) const {
  const Chart& ci = charts_[static_cast<std::size_t>(i)];
  const Chart& cj = charts_[static_cast<std::size_t>(j)];
  // Per-axis components of the patch intersection, in chart-i branch angles,
  // then mapped to chart-i coordinates.
  std::vector<std::vector<ArcInterval>> axis_comps(static_cast<std::size_t>(dim()));
  for (int a = 0; a < dim(); ++a) {
    const ArcInterval& ai = ci.arc(a);
    const ArcInterval& aj = cj.arc(a);
    int kmax = manifold_.periodic() ? 2 : 0;
    for (int k = -kmax; k <= kmax; ++k) {
      double lo = std::max(ai.lo, aj.lo + k * kTwoPi);
      double hi = std::min(ai.hi, aj.hi + k * kTwoPi);
      if (hi - lo > 1e-12) axis_comps[static_cast<std::size_t>(a)].push_back(ArcInterval{lo, hi});
    }
  }
  std::vector<Box> out;
  if (dim() == 1) {
    for (const ArcInterval& arc : axis_comps[0]) {
      ArcInterval x = ci.coord_interval(0, arc);
      out.push_back(Box::interval(x.lo, x.hi));
    }
  } else {
    for (const ArcInterval& a0 : axis_comps[0]) {
      for (const ArcInterval& a1 : axis_comps[1]) {
        ArcInterval x0 = ci.coord_interval(0, a0);
        ArcInterval x1 = ci.coord_interval(1, a1);
        out.push_back(Box::rect(x0.lo, x0.hi, x1.lo, x1.hi));
      }
    }
  }
  return out;
}

std::vector<Vec> Atlas::sample_points(int n) const {
  std::vector<Vec> pts;
  if (manifold_.kind == ManifoldKind::Interval) {
    double lo = manifold_.interval_lo, hi = manifold_.interval_hi;
    double pad = 0.02 * (hi - lo);  // the manifold is open; sample a compact core
    for (int i = 0; i < n; ++i)
      pts.push_back(vec1(lo + pad + (hi - lo - 2 * pad) * i / (n - 1.0)));
    return pts;
  }
  if (dim() == 1) {
    for (int i = 0; i < n; ++i) pts.push_back(vec1(kTwoPi * i / n));
    return pts;
  }
  int per_axis = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j)
      pts.push_back(vec2(kTwoPi * i / per_axis, kTwoPi * j / per_axis));
  return pts;
}

void Atlas::validate(double tol) const {
  std::vector<Vec> pts = sample_points(1000);
  for (const Vec& p : pts) {
    bool covered = false;
    for (const Chart& c : charts_)
      if (c.contains(p)) {
        covered = true;
        break;
      }
    if (!covered) fail_construction("atlas does not cover the manifold");
  }
  // chart round trip on the image
  for (const Chart& c : charts_) {
    Box im = c.image();
    for (int i = 0; i < 1000; ++i) {
      Vec x = im.center();
      for (int a = 0; a < dim(); ++a)
        x[a] = im.lo[static_cast<std::size_t>(a)] +
               im.width(a) * (0.001 + 0.998 * kronecker(17, static_cast<std::uint64_t>(i), a));
      Vec back = c.to_coords(c.to_manifold(x));
      if (distance(back, x) > tol) fail_construction("chart round trip exceeded tolerance");
    }
  }
  // cocycle on triple overlaps
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      for (int k = 0; k < size(); ++k) {
        if (i == j || j == k || i == k) continue;
        if (overlap_components(i, j).empty() || overlap_components(j, k).empty() ||
            overlap_components(i, k).empty())
          continue;
        Diffeo tij = transition(*this, i, j);
        Diffeo tjk = transition(*this, j, k);
        Diffeo tik = transition(*this, i, k);
        for (const Vec& p : pts) {
          if (!charts_[static_cast<std::size_t>(i)].contains(p) ||
              !charts_[static_cast<std::size_t>(j)].contains(p) ||
              !charts_[static_cast<std::size_t>(k)].contains(p))
            continue;
          Vec x = charts_[static_cast<std::size_t>(i)].to_coords(p);
          Vec lhs = tik.forward(x);
          Vec rhs = tjk.forward(tij.forward(x));
          if (distance(lhs, rhs) > tol) fail_construction("cocycle identity failed");
        }
      }
    }
  }
}

Diffeo transition(const Atlas& atlas, int i, int j) {
  if (atlas.overlap_components(i, j).empty()) fail_domain("charts do not overlap");
  const Chart& ci = atlas.charts()[static_cast<std::size_t>(i)];
  const Chart& cj = atlas.charts()[static_cast<std::size_t>(j)];
  double det_fwd = 1.0;
  for (int a = 0; a < atlas.dim(); ++a)
    det_fwd *= std::abs(cj.scale(a) / ci.scale(a));
  return Diffeo::from_maps(
      atlas.dim(), [ci, cj](const Vec& x) { return cj.to_coords(ci.to_manifold(x)); },
      [ci, cj](const Vec& y) { return ci.to_coords(cj.to_manifold(y)); },
      [det_fwd](const Vec&) { return det_fwd; },
      [det_fwd](const Vec&) { return 1.0 / det_fwd; });
}

Diffeo transition_on_component(const Atlas& atlas, int i, int j, const Box& component) {
  const Chart& ci = atlas.charts()[static_cast<std::size_t>(i)];
  const Chart& cj = atlas.charts()[static_cast<std::size_t>(j)];
  Vec probe = component.center();
  Vec image = cj.to_coords(ci.to_manifold(probe));
  Vec scale = zero_vec(atlas.dim()), offset = zero_vec(atlas.dim());
  for (int a = 0; a < atlas.dim(); ++a) {
    scale[a] = cj.scale(a) / ci.scale(a);
    offset[a] = image[a] - scale[a] * probe[a];
  }
  return Diffeo::affine(scale, offset);
}

Atlas circle_two_arc_atlas() {
  Manifold m = Manifold::circle();
  double e = M_PI / 8.0;
  std::vector<Chart> charts;
  charts.emplace_back(m, std::array<ArcInterval, 2>{ArcInterval{-e, M_PI + e}, ArcInterval{}},
                      std::array<double, 2>{1.0, 1.0}, std::array<double, 2>{0.0, 0.0}, "arc0");
  charts.emplace_back(
      m, std::array<ArcInterval, 2>{ArcInterval{M_PI - e, 2.0 * M_PI + e}, ArcInterval{}},
      std::array<double, 2>{1.0, 1.0}, std::array<double, 2>{0.0, 0.0}, "arc1");
  return Atlas(m, std::move(charts), "circle-two-arc");
}

Atlas circle_three_arc_atlas() {
  Manifold m = Manifold::circle();
  double half = 2.2;  // wide enough for genuine triple overlaps
  std::vector<Chart> charts;
  const char* names[3] = {"arcA", "arcB", "arcC"};
  for (int i = 0; i < 3; ++i) {
    double c = kTwoPi * i / 3.0;
    charts.emplace_back(m, std::array<ArcInterval, 2>{ArcInterval{c - half, c + half}, ArcInterval{}},
                        std::array<double, 2>{1.0, 1.0}, std::array<double, 2>{0.0, 0.0}, names[i]);
  }
  return Atlas(m, std::move(charts), "circle-three-arc");
}

Atlas circle_two_arc_scaled_atlas(double second_scale) {
  Manifold m = Manifold::circle();
  double e = M_PI / 8.0;
  std::vector<Chart> charts;
  charts.emplace_back(m, std::array<ArcInterval, 2>{ArcInterval{-e, M_PI + e}, ArcInterval{}},
                      std::array<double, 2>{1.0, 1.0}, std::array<double, 2>{0.0, 0.0}, "arc0");
  charts.emplace_back(
      m, std::array<ArcInterval, 2>{ArcInterval{M_PI - e, 2.0 * M_PI + e}, ArcInterval{}},
      std::array<double, 2>{second_scale, 1.0}, std::array<double, 2>{0.3, 0.0}, "arc1-scaled");
  return Atlas(m, std::move(charts), "circle-two-arc-scaled");
}

Atlas torus_four_patch_atlas() {
  Manifold m = Manifold::torus();
  double e = M_PI / 8.0;
  ArcInterval lowArc{-e, M_PI + e};
  ArcInterval highArc{M_PI - e, 2.0 * M_PI + e};
  std::vector<Chart> charts;
  const ArcInterval arcs[2] = {lowArc, highArc};
  const char* names[4] = {"patch00", "patch01", "patch10", "patch11"};
  int idx = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      charts.emplace_back(m, std::array<ArcInterval, 2>{arcs[a], arcs[b]},
                          std::array<double, 2>{1.0, 1.0}, std::array<double, 2>{0.0, 0.0},
                          names[idx++]);
  return Atlas(m, std::move(charts), "torus-four-patch");
}

Atlas interval_one_chart_atlas(double lo, double hi) {
  Manifold m = Manifold::interval(lo, hi);
  std::vector<Chart> charts;
  charts.emplace_back(m, std::array<ArcInterval, 2>{ArcInterval{lo, hi}, ArcInterval{}},
                      std::array<double, 2>{1.0, 1.0}, std::array<double, 2>{0.0, 0.0}, "whole");
  return Atlas(m, std::move(charts), "interval-one-chart");
}

PartitionOfUnity::PartitionOfUnity(const Atlas& atlas, int variant)
    : atlas_(std::make_shared<Atlas>(atlas)), variant_(variant) {
  std::uint64_t seed = 0xb0a0ULL + static_cast<std::uint64_t>(variant) * 131ULL;
  bool single = atlas.size() == 1;
  for (int j = 0; j < atlas.size(); ++j) {
    std::array<AxisProfile, 2> prof{};
    for (int a = 0; a < atlas.dim(); ++a) {
      const ArcInterval& arc = atlas.charts()[static_cast<std::size_t>(j)].arc(a);
      double w = arc.width();
      std::uint64_t ctr = static_cast<std::uint64_t>(j) * 8 + static_cast<std::uint64_t>(a) * 4;
      double shrink = w * (0.02 + 0.02 * unit_real(seed, ctr + 0));
      double t_lo = w * (0.10 + 0.08 * unit_real(seed, ctr + 1));
      double t_hi = w * (0.10 + 0.08 * unit_real(seed, ctr + 2));
      AxisProfile& ap = prof[static_cast<std::size_t>(a)];
      ap.lo = arc.lo + shrink;
      ap.hi = arc.hi - shrink;
      ap.taper_lo = t_lo;
      ap.taper_hi = t_hi;
      if (single) {
        // degenerate one-chart cover: plateau over the sampled core
        ap.taper_lo = w * 0.015;
        ap.taper_hi = w * 0.015;
        ap.lo = arc.lo + w * 0.002;
        ap.hi = arc.hi - w * 0.002;
      }
    }
    raw_.push_back(prof);
  }
  // subordination and cover
  for (const Vec& p : atlas.sample_points(1000)) {
    double total = 0.0;
    for (int j = 0; j < size(); ++j) total += raw_weight(j, p);
    if (!(total > 1e-9)) fail_construction("partition of unity: cover gap at a sample point");
  }
}

double PartitionOfUnity::raw_weight(int j, const Vec& p) const {
  const Atlas& atlas = *atlas_;
  const Chart& chart = atlas.charts()[static_cast<std::size_t>(j)];
  double v = 1.0;
  for (int a = 0; a < atlas.dim(); ++a) {
    auto t = chart.arc(a).branch(p[a], atlas.manifold().periodic());
    if (!t) return 0.0;
    const AxisProfile& ap = raw_[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)];
    if (*t <= ap.lo || *t >= ap.hi) return 0.0;
    v *= smooth_step((*t - ap.lo) / ap.taper_lo) * smooth_step((ap.hi - *t) / ap.taper_hi);
  }
  return v;
}

double PartitionOfUnity::weight(int j, const Vec& p) const {
  double total = 0.0;
  for (int k = 0; k < size(); ++k) total += raw_weight(k, p);
  if (total <= 0.0) return 0.0;
  return raw_weight(j, p) / total;
}

std::array<ArcInterval, 2> PartitionOfUnity::weight_support(int j) const {
  std::array<ArcInterval, 2> out{};
  for (int a = 0; a < atlas_->dim(); ++a) {
    const AxisProfile& ap = raw_[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)];
    out[static_cast<std::size_t>(a)] = ArcInterval{ap.lo, ap.hi};
  }
  return out;
}

PartitionOfUnity build_pou(const Atlas& atlas, int variant) {
  return PartitionOfUnity(atlas, variant);
}

double ManifoldBump::value(const Vec& p) const {
  double r2 = 0.0;
  for (int a = 0; a < manifold.dim; ++a) {
    double d = manifold.periodic() ? angle_diff(p[a], center[a]) : p[a] - center[a];
    d /= scale;
    r2 += d * d;
  }
  return bump_shape(r2);
}

ManifoldGerm ManifoldGerm::constant_density(const SmoothFunction& density, const Manifold& m,
                                            const std::string& label) {
  ManifoldGerm g;
  g.kind_ = Kind::Constant;
  g.manifold_ = m;
  g.field_ = density;
  g.nominal_gamma_ = std::numeric_limits<double>::infinity();
  g.label_ = label;
  return g;
}

ManifoldGerm ManifoldGerm::taylor(const SmoothFunction& g, int k, const Manifold& m) {
  if (g.analytic_order() < k + 1)
    fail_config("manifold taylor germ needs analytic derivatives of g to order k+1");
  ManifoldGerm out;
  out.kind_ = Kind::Taylor;
  out.manifold_ = m;
  out.field_ = g;
  out.taylor_k_ = k;
  out.nominal_gamma_ = k + 1.0;
  out.label_ = "taylor(" + g.label() + ",k=" + std::to_string(k) + ")";
  return out;
}

ManifoldGerm ManifoldGerm::young(double beta_g, double a, int J, const Manifold& m) {
  if (m.dim != 1) fail_config("young manifold germ is one-dimensional");
  ManifoldGerm out;
  out.kind_ = Kind::Young;
  out.manifold_ = m;
  out.field_ = SmoothFunction::lacunary(beta_g, J);
  out.beta_g_ = beta_g;
  out.lac_a_ = a;
  out.lac_J_ = J;
  out.nominal_gamma_ = beta_g + a - 1.0;
  out.label_ = "young(beta_g=" + std::to_string(beta_g) + ",a=" + std::to_string(a) + ")";
  return out;
}

Germ ManifoldGerm::chart_germ(const Chart& chart) const {
  OpenSetDomain domain = OpenSetDomain::box(chart.image());
  int d = chart.dim();
  Vec scale = zero_vec(d), offset = zero_vec(d);
  for (int a = 0; a < d; ++a) {
    scale[a] = chart.scale(a);
    offset[a] = 0.0;
  }
  // chart coordinate x = s*t + b on the branch representative t; to express
  // objects defined in angle variables we precompose with t = (x - b)/s.
  Vec chart_offset = zero_vec(d);
  for (int a = 0; a < d; ++a) chart_offset[a] = chart.offset(a);
  double det = chart.jac_det_to_manifold();

  switch (kind_) {
    case Kind::Constant: {
      SmoothFunction density = SmoothFunction::affine_image(field_, scale, chart_offset, det);
      PairingOracle t = PairingOracle::smooth_density(std::move(density), domain);
      Germ g = make_constant(t, label_ + "@" + chart.label());
      return g;
    }
    case Kind::Taylor: {
      SmoothFunction gfield = field_;
      int k = taylor_k_;
      Chart ch = chart;
      Vec sc = scale, off = chart_offset;
      Germ out(
          domain,
          [gfield, k, ch, sc, off, det, domain](const Vec& x) {
            double t_p = (x[0] - off[0]) / sc[0];  // branch angle of the base point
            std::vector<double> c(static_cast<std::size_t>(k) + 1);
            double fact = 1.0;
            for (int j = 0; j <= k; ++j) {
              if (j > 0) fact *= j;
              c[static_cast<std::size_t>(j)] = gfield.derivative1(t_p, j) / fact;
            }
            double s0 = sc[0], b0 = off[0];
            SmoothFunction density = SmoothFunction::custom(
                [c, t_p, s0, b0, det](const Vec& y) {
                  double t = (y[0] - b0) / s0 - t_p;
                  double v = 0.0;
                  for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
                  return det * v;
                },
                "chart-taylor");
            return PairingOracle::smooth_density(std::move(density), domain);
          },
          label_ + "@" + chart.label());
      out.nominal_gamma = nominal_gamma_;
      out.nominal_alpha = 0.0;
      return out;
    }
    case Kind::Young: {
      if (!chart.angle_chart())
        fail_config("young manifold germ needs angle charts (unit coordinate scale)");
      PairingOracle xi = PairingOracle::lacunary_series(lac_a_, lac_J_, true, domain);
      SmoothFunction gfield = field_;
      Germ out(
          domain, [gfield, xi](const Vec& p) { return xi.scaled_by(gfield.value(p)); },
          label_ + "@" + chart.label());
      out.nominal_gamma = nominal_gamma_;
      out.nominal_alpha = lac_a_ - 1.0;
      out.nominal_beta = lac_a_ - 1.0;
      return out;
    }
  }
  fail_config("unknown germ kind");
}

namespace {

// Representatives of an angular interval inside a chart arc (<= 2 pieces).
std::vector<ArcInterval> arc_pieces(const ArcInterval& window, double lo, double hi,
                                    bool periodic) {
  std::vector<ArcInterval> out;
  int kmax = periodic ? 2 : 0;
  for (int k = -kmax; k <= kmax; ++k) {
    double a = std::max(window.lo, lo + k * kTwoPi);
    double b = std::min(window.hi, hi + k * kTwoPi);
    if (b - a > 1e-12) out.push_back(ArcInterval{a, b});
  }
  return out;
}

}  // namespace

GlueResult glue_check(const std::vector<LocalDistribution>& locals, const Atlas& atlas,
                      int bumps_per_overlap, std::uint64_t seed, double tol, ExecPolicy policy) {
  if (bumps_per_overlap <= 0) fail_config("glue check needs a nonempty test ensemble");
  if (static_cast<int>(locals.size()) != atlas.size())
    fail_config("glue check needs one local distribution per chart");

  struct Task {
    int i, j, g_id;
    TestFunction g;
    Diffeo tau_inv;
  };
  std::vector<Task> tasks;
  TestFunction bump = TestFunction::standard_bump(atlas.dim());
  for (int i = 0; i < atlas.size(); ++i) {
    for (int j = i + 1; j < atlas.size(); ++j) {
      std::vector<Box> comps = atlas.overlap_components(i, j);
      if (comps.empty()) continue;
      int per_comp =
          std::max(1, bumps_per_overlap / std::max(1, static_cast<int>(comps.size())));
      int g_id = 0;
      for (const Box& comp : comps) {
        Diffeo tau = transition_on_component(atlas, i, j, comp);
        Diffeo tau_inv = tau.inverted();
        for (int t = 0; t < per_comp; ++t) {
          std::uint64_t ctr = static_cast<std::uint64_t>(((i * 97 + j) * 131 + g_id) * 7);
          double maxscale = comp.min_width() / 8.0;
          double scl = maxscale * (0.5 + 0.5 * unit_real(seed, ctr + 1));
          Vec c = zero_vec(atlas.dim());
          bool ok = true;
          for (int a = 0; a < atlas.dim(); ++a) {
            double lo = comp.lo[static_cast<std::size_t>(a)] + 1.05 * scl;
            double hi = comp.hi[static_cast<std::size_t>(a)] - 1.05 * scl;
            if (hi <= lo) {
              ok = false;
              break;
            }
            c[a] = lo + (hi - lo) * kronecker(seed, ctr, a);
          }
          if (!ok) continue;
          tasks.push_back(Task{i, j, g_id++, rescale(bump, c, scl), tau_inv});
        }
      }
    }
  }
  if (tasks.empty()) fail_config("glue check found no admissible overlap test functions");

  GlueResult res;
  res.tol = tol;
  res.rows.resize(tasks.size());
  par_for(tasks.size(), policy, [&](std::size_t t) {
    const Task& task = tasks[t];
    GlueRow& row = res.rows[t];
    row.chart_i = task.i;
    row.chart_j = task.j;
    row.g_id = task.g_id;
    row.lhs = locals[static_cast<std::size_t>(task.i)](task.g);
    GenericIntegrand moved = compose_with(task.g, task.tau_inv);
    row.rhs = locals[static_cast<std::size_t>(task.j)](moved);
    row.abs_diff = std::abs(row.lhs - row.rhs);
  });
  for (const GlueRow& row : res.rows) {
    if (row.abs_diff > res.max_abs_diff) {
      res.max_abs_diff = row.abs_diff;
      res.witness = row;
    }
  }
  res.pass = res.max_abs_diff <= tol;
  return res;
}

GlobalReconstruction global_reconstruct(const ManifoldGerm& germ, const Atlas& atlas,
                                        const PartitionOfUnity& pou, const GlobalOptions& options,
                                        const QuadratureSpec& spec, ExecPolicy policy) {
  GlobalReconstruction out;
  out.atlas_ = atlas;
  out.pou_ = pou;
  out.spec_ = spec;
  out.policy_ = policy;

  TestFunction f = TestFunction::standard_bump(atlas.dim());
  double gamma_min = std::numeric_limits<double>::infinity();
  int order = options.mollifier_order.value_or(1);
  for (int j = 0; j < atlas.size(); ++j) {
    const Chart& chart = atlas.charts()[static_cast<std::size_t>(j)];
    Germ chart_f = germ.chart_germ(chart);
    // compact: the coordinate box of supp rho_j, shrunk by D/8
    std::array<ArcInterval, 2> supp = pou.weight_support(j);
    Box k;
    k.dim = atlas.dim();
    for (int a = 0; a < atlas.dim(); ++a) {
      ArcInterval x = chart.coord_interval(a, supp[static_cast<std::size_t>(a)]);
      k.lo[static_cast<std::size_t>(a)] = x.lo;
      k.hi[static_cast<std::size_t>(a)] = x.hi;
    }
    double margin = OpenSetDomain::box(chart.image()).compact_margin(k);
    k = k.shrunk(margin / 8.0);
    ScanGrid grid = make_scan_grid(k, OpenSetDomain::box(chart.image()), options.scan_m_min,
                                   options.scan_m_max, options.pairs_per_stratum,
                                   options.seed + static_cast<std::uint64_t>(j));
    auto rows = coherence_scan(chart_f, grid, f, spec, policy);
    CoherenceReport rep = fit_exponents(rows);
    out.reports_.push_back(rep);
    gamma_min = std::min(gamma_min, rep.exact ? std::numeric_limits<double>::infinity()
                                              : rep.gamma_hat);
    if (!options.mollifier_order) order = std::max(order, mollifier_order_for(rep));
  }
  out.gamma_hat_ = gamma_min;
  out.order_ = order;

  MollifierFamily m = build_mollifier(TestFunction::standard_bump(atlas.dim()), order, spec);

  for (int j = 0; j < atlas.size(); ++j) {
    const Chart& chart = atlas.charts()[static_cast<std::size_t>(j)];
    Germ chart_f = germ.chart_germ(chart);
    LocalReconstruction recon(chart_f, m, options.n_max, spec, policy);
    if (gamma_min > 0.0 || options.choice_amplitude == 0.0) {
      out.locals_.push_back([recon](const Integrand& g) { return recon(g); });
    } else {
      // Admissible local choice for nonpositive exponents: any bounded smooth
      // density satisfies the reconstruction bound, so the chart index and
      // seed select one deterministically.
      Box im = chart.image();
      Vec c = im.center();
      double scl = 0.45 * im.min_width();
      double amp = options.choice_amplitude *
                   (2.0 * unit_real(options.seed, 0xc01ceULL + static_cast<std::uint64_t>(j)) - 1.0);
      TestFunction dens = rescale(TestFunction::standard_bump(atlas.dim()), c, scl);
      PairingOracle extra =
          PairingOracle::smooth_density(SmoothFunction::custom(
                                            [dens, amp, scl, im](const Vec& y) {
                                              (void)im;
                                              return amp * std::pow(scl, im.dim) * dens.value(y);
                                            },
                                            "local-choice"),
                                        OpenSetDomain::box(im));
      QuadratureSpec sp = spec;
      out.locals_.push_back([recon, extra, sp](const Integrand& g) {
        return recon(g) + extra.pair(g, sp);
      });
    }
  }

  if (gamma_min > 0.0 && options.run_glue && atlas.size() > 1) {
    out.glue_ = glue_check(out.locals_, atlas, options.glue_bumps_per_overlap, options.seed,
                           options.glue_tol, policy);
    if (!out.glue_.pass)
      throw Error(ErrorKind::Verification,
                  "glue check failed for a positive-exponent germ (max discrepancy " +
                      std::to_string(out.glue_.max_abs_diff) + ")");
  } else {
    out.glue_.pass = true;
    out.glue_.tol = options.glue_tol;
  }
  return out;
}

double GlobalReconstruction::operator()(const ManifoldBump& h) const {
  const Atlas& atlas = atlas_;
  double total = 0.0;
  for (int j = 0; j < atlas.size(); ++j) {
    const Chart& chart = atlas.charts()[static_cast<std::size_t>(j)];
    std::array<ArcInterval, 2> supp = pou_.weight_support(j);
    // pieces of supp(rho_j) cap supp(h), per axis, in branch angles
    std::vector<std::vector<ArcInterval>> axis_pieces(static_cast<std::size_t>(atlas.dim()));
    bool empty = false;
    for (int a = 0; a < atlas.dim(); ++a) {
      axis_pieces[static_cast<std::size_t>(a)] =
          arc_pieces(supp[static_cast<std::size_t>(a)], h.center[a] - h.scale,
                     h.center[a] + h.scale, atlas.manifold().periodic());
      if (axis_pieces[static_cast<std::size_t>(a)].empty()) empty = true;
    }
    if (empty) continue;

    const PartitionOfUnity& pou = pou_;
    auto integrand_value = [&chart, &pou, j, &h](const Vec& x) {
      Vec p = chart.to_manifold(x);
      double w = pou.weight(j, p);
      if (w == 0.0) return 0.0;
      return w * h.value(p);
    };

    auto piece_box = [&](const ArcInterval& a0, const ArcInterval* a1) {
      Box b;
      b.dim = atlas.dim();
      for (int a = 0; a < atlas.dim(); ++a) {
        ArcInterval x = chart.coord_interval(a, a == 0 ? a0 : *a1);
        b.lo[static_cast<std::size_t>(a)] = x.lo;
        b.hi[static_cast<std::size_t>(a)] = x.hi;
      }
      return b;
    };

    if (atlas.dim() == 1) {
      for (const ArcInterval& piece : axis_pieces[0]) {
        GenericIntegrand g(integrand_value, piece_box(piece, nullptr));
        total += locals_[static_cast<std::size_t>(j)](g);
      }
    } else {
      for (const ArcInterval& p0 : axis_pieces[0])
        for (const ArcInterval& p1 : axis_pieces[1]) {
          GenericIntegrand g(integrand_value, piece_box(p0, &p1));
          total += locals_[static_cast<std::size_t>(j)](g);
        }
    }
  }
  return total;
}

CompareResult atlas_compare(const ManifoldGerm& germ, const Atlas& a, const Atlas& b, int n_h,
                            std::uint64_t seed, const GlobalOptions& options,
                            const QuadratureSpec& spec, ExecPolicy policy) {
  PartitionOfUnity pa = build_pou(a, 0);
  PartitionOfUnity pb = build_pou(b, 0);
  GlobalReconstruction ra = global_reconstruct(germ, a, pa, options, spec, policy);
  GlobalReconstruction rb = global_reconstruct(germ, b, pb, options, spec, policy);
  std::vector<ManifoldBump> hs = manifold_bump_ensemble(germ.manifold(), n_h, seed);
  CompareResult res;
  res.rows.resize(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    CompareRow& row = res.rows[i];
    row.h_id = static_cast<int>(i);
    row.rf_a = ra(hs[i]);
    row.rf_b = rb(hs[i]);
    row.rel_diff = std::abs(row.rf_a - row.rf_b) / (1.0 + std::abs(row.rf_a));
    res.max_rel_diff = std::max(res.max_rel_diff, row.rel_diff);
  }
  return res;
}

std::vector<ManifoldBump> manifold_bump_ensemble(const Manifold& m, int n, std::uint64_t seed,
                                                 double min_scale, double max_scale) {
  std::vector<ManifoldBump> out;
  for (int i = 0; i < n; ++i) {
    ManifoldBump h;
    h.manifold = m;
    h.center = zero_vec(m.dim);
    for (int a = 0; a < m.dim; ++a)
      h.center[a] = kTwoPi * kronecker(seed, static_cast<std::uint64_t>(i), a);
    h.scale = min_scale +
              (max_scale - min_scale) * unit_real(seed, 0x5ca1eULL + static_cast<std::uint64_t>(i));
    out.push_back(h);
  }
  return out;
}

double manifold_density_pairing(const SmoothFunction& density, const ManifoldBump& h,
                                const QuadratureSpec& spec) {
  Box b;
  b.dim = h.manifold.dim;
  for (int a = 0; a < b.dim; ++a) {
    b.lo[static_cast<std::size_t>(a)] = h.center[a] - h.scale;
    b.hi[static_cast<std::size_t>(a)] = h.center[a] + h.scale;
  }
  ManifoldBump hh = h;
  return integrate_box(b, spec, [&density, hh](const Vec& th) {
    return density.value(th) * hh.value(th);
  }, density.osc_freq());
}

}  // namespace germlab
