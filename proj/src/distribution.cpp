#include "germlab/distribution.hpp"

#include <cmath>

#include "germlab/error.hpp"

namespace germlab {

namespace {

Box sampled_image_box(const Box& b, const std::function<Vec(const Vec&)>& map) {
  // Bounding box of the image, from edge samples with a small safety margin.
  // Over-covering is harmless for supports: the integrand vanishes outside.
  constexpr int kSamples = 17;
  Box out;
  out.dim = b.dim;
  bool first = true;
  auto visit = [&](const Vec& p) {
    Vec q = map(p);
    for (int i = 0; i < b.dim; ++i) {
      if (first) {
        out.lo[static_cast<std::size_t>(i)] = q[i];
        out.hi[static_cast<std::size_t>(i)] = q[i];
      } else {
        out.lo[static_cast<std::size_t>(i)] = std::min(out.lo[static_cast<std::size_t>(i)], q[i]);
        out.hi[static_cast<std::size_t>(i)] = std::max(out.hi[static_cast<std::size_t>(i)], q[i]);
      }
    }
    first = false;
  };
  if (b.dim == 1) {
    for (int i = 0; i < kSamples; ++i)
      visit(vec1(b.lo[0] + b.width(0) * i / (kSamples - 1.0)));
  } else {
    for (int i = 0; i < kSamples; ++i) {
      double x = b.lo[0] + b.width(0) * i / (kSamples - 1.0);
      for (int j = 0; j < kSamples; ++j) {
        double y = b.lo[1] + b.width(1) * j / (kSamples - 1.0);
        visit(vec2(x, y));
      }
    }
  }
  double pad = 0.0;
  for (int i = 0; i < b.dim; ++i) pad = std::max(pad, 0.02 * out.width(i) + 1e-12);
  return out.enlarged(pad);
}

}  // namespace

Diffeo Diffeo::identity(int dim) {
  Vec one = zero_vec(dim), zero = zero_vec(dim);
  for (int i = 0; i < dim; ++i) one[i] = 1.0;
  return affine(one, zero);
}

Diffeo Diffeo::affine(const Vec& scale, const Vec& offset) {
  for (int i = 0; i < scale.dim; ++i)
    if (scale[i] == 0.0) fail_domain("affine map must have nonzero scales");
  Diffeo d;
  d.dim = scale.dim;
  double det = 1.0;
  for (int i = 0; i < scale.dim; ++i) det *= std::abs(scale[i]);
  d.forward = [scale, offset](const Vec& x) {
    Vec y = x;
    for (int i = 0; i < x.dim; ++i) y[i] = scale[i] * x[i] + offset[i];
    return y;
  };
  d.inverse = [scale, offset](const Vec& y) {
    Vec x = y;
    for (int i = 0; i < y.dim; ++i) x[i] = (y[i] - offset[i]) / scale[i];
    return x;
  };
  d.jac_det_forward = [det](const Vec&) { return det; };
  d.jac_det_inverse = [det](const Vec&) { return 1.0 / det; };
  d.map_box_forward = [scale, offset](const Box& b) {
    Box r = b;
    for (int i = 0; i < b.dim; ++i) {
      double a = scale[i] * b.lo[static_cast<std::size_t>(i)] + offset[i];
      double c = scale[i] * b.hi[static_cast<std::size_t>(i)] + offset[i];
      r.lo[static_cast<std::size_t>(i)] = std::min(a, c);
      r.hi[static_cast<std::size_t>(i)] = std::max(a, c);
    }
    return r;
  };
  d.map_box_inverse = [scale, offset](const Box& b) {
    Box r = b;
    for (int i = 0; i < b.dim; ++i) {
      double a = (b.lo[static_cast<std::size_t>(i)] - offset[i]) / scale[i];
      double c = (b.hi[static_cast<std::size_t>(i)] - offset[i]) / scale[i];
      r.lo[static_cast<std::size_t>(i)] = std::min(a, c);
      r.hi[static_cast<std::size_t>(i)] = std::max(a, c);
    }
    return r;
  };
  return d;
}

Diffeo Diffeo::from_maps(int dim, std::function<Vec(const Vec&)> fwd,
                         std::function<Vec(const Vec&)> inv,
                         std::function<double(const Vec&)> det_fwd,
                         std::function<double(const Vec&)> det_inv) {
  Diffeo d;
  d.dim = dim;
  d.forward = std::move(fwd);
  d.inverse = std::move(inv);
  d.jac_det_forward = std::move(det_fwd);
  d.jac_det_inverse = std::move(det_inv);
  if (d.forward) {
    auto f = d.forward;
    d.map_box_forward = [f](const Box& b) { return sampled_image_box(b, f); };
  }
  if (d.inverse) {
    auto f = d.inverse;
    d.map_box_inverse = [f](const Box& b) { return sampled_image_box(b, f); };
  }
  return d;
}

Diffeo Diffeo::inverted() const {
  if (!complete()) fail_config("diffeomorphism descriptor is missing inverse or Jacobian evaluators");
  Diffeo d;
  d.dim = dim;
  d.forward = inverse;
  d.inverse = forward;
  d.jac_det_forward = jac_det_inverse;
  d.jac_det_inverse = jac_det_forward;
  d.map_box_forward = map_box_inverse;
  d.map_box_inverse = map_box_forward;
  return d;
}

Diffeo Diffeo::compose(const Diffeo& outer, const Diffeo& inner) {
  Diffeo d;
  d.dim = inner.dim;
  auto of = outer.forward, inf = inner.forward;
  auto oi = outer.inverse, ini = inner.inverse;
  d.forward = [of, inf](const Vec& x) { return of(inf(x)); };
  if (oi && ini) d.inverse = [oi, ini](const Vec& y) { return ini(oi(y)); };
  if (outer.jac_det_forward && inner.jac_det_forward) {
    auto odf = outer.jac_det_forward, idf = inner.jac_det_forward;
    d.jac_det_forward = [odf, idf, inf](const Vec& x) { return odf(inf(x)) * idf(x); };
  }
  if (outer.jac_det_inverse && inner.jac_det_inverse && oi) {
    auto odi = outer.jac_det_inverse, idi = inner.jac_det_inverse;
    d.jac_det_inverse = [odi, idi, oi](const Vec& y) { return odi(y) * idi(oi(y)); };
  }
  if (outer.map_box_forward && inner.map_box_forward) {
    auto ob = outer.map_box_forward, ib = inner.map_box_forward;
    d.map_box_forward = [ob, ib](const Box& b) { return ob(ib(b)); };
  }
  if (outer.map_box_inverse && inner.map_box_inverse) {
    auto ob = outer.map_box_inverse, ib = inner.map_box_inverse;
    d.map_box_inverse = [ob, ib](const Box& b) { return ib(ob(b)); };
  }
  return d;
}

GenericIntegrand compose_with(const Integrand& h, const Diffeo& phi) {
  if (!phi.forward || !phi.map_box_inverse)
    fail_config("composition requires the forward map and an inverse box mapper");
  auto fwd = phi.forward;
  const Integrand* hp = &h;
  Box support = phi.map_box_inverse(h.support());
  // The composed integrand references `h`; callers keep it alive for the call.
  return GenericIntegrand([hp, fwd](const Vec& y) { return hp->value(fwd(y)); }, support,
                          h.osc_freq());
}

PairingOracle PairingOracle::smooth_density(SmoothFunction u, OpenSetDomain domain) {
  PairingOracle t;
  t.backing_ = Backing::SmoothDensity;
  t.density_ = std::move(u);
  t.domain_ = std::move(domain);
  return t;
}

PairingOracle PairingOracle::indicator_density(Box b, double value, OpenSetDomain domain) {
  PairingOracle t;
  t.backing_ = Backing::IndicatorDensity;
  t.indicator_box_ = b;
  t.indicator_value_ = value;
  t.domain_ = std::move(domain);
  return t;
}

PairingOracle PairingOracle::dirac(const Vec& location, double weight, OpenSetDomain domain) {
  return dirac_comb({location}, {weight}, std::move(domain));
}

PairingOracle PairingOracle::dirac_comb(std::vector<Vec> locations, std::vector<double> weights,
                                        OpenSetDomain domain) {
  if (locations.size() != weights.size()) fail_config("dirac comb: locations/weights mismatch");
  PairingOracle t;
  t.backing_ = Backing::DiracComb;
  t.atoms_ = std::move(locations);
  t.atom_weights_ = std::move(weights);
  t.domain_ = std::move(domain);
  return t;
}

PairingOracle PairingOracle::lacunary_series(double a, int J, bool derivative,
                                             OpenSetDomain domain) {
  if (domain.dim() != 1) fail_config("lacunary series backing is one-dimensional");
  if (!(a > 0.0 && a < 1.0)) fail_config("lacunary exponent must lie in (0,1)");
  PairingOracle t;
  t.backing_ = Backing::LacunarySeries;
  t.lac_a_ = a;
  t.lac_J_ = J;
  t.lac_derivative_ = derivative;
  t.domain_ = std::move(domain);
  return t;
}

PairingOracle PairingOracle::linear_combination(
    std::vector<std::pair<double, PairingOracle>> parts) {
  if (parts.empty()) fail_config("empty linear combination of oracles");
  PairingOracle t;
  t.backing_ = Backing::LinearCombination;
  t.domain_ = parts.front().second.domain();
  for (auto& [c, o] : parts)
    t.combo_.emplace_back(c, std::make_shared<PairingOracle>(std::move(o)));
  return t;
}

PairingOracle PairingOracle::zero(OpenSetDomain domain) {
  return smooth_density(SmoothFunction::constant(0.0), std::move(domain));
}

PairingOracle PairingOracle::scaled_by(double c) const {
  return linear_combination({{c, *this}});
}

namespace {

// int dens(y) f(y) dy for one scaled-profile placement, in the unit
// coordinates of the placement. Node positions depend only on (radius, panel
// count), so repeated placements of one profile evaluate it at identical
// arguments; the weight carries the full Jacobian of y = center + scale*u.
double pair_density_term(const std::function<double(const Vec&)>& dens, const TestTerm& term,
                         int dim, const QuadratureSpec& spec, double osc_freq) {
  double r = term.profile->radius();
  int panels = panel_count(spec, 2.0 * r * term.scale, osc_freq);
  // a profile with internal structure needs panels sized to its features
  double feature = term.profile->feature_scale();
  if (feature > 0.0)
    panels = std::max(panels, static_cast<int>(std::ceil(6.0 * 2.0 * r / feature)));
  const Rule1D& rule = unit_rule(panels, spec.nodes_per_panel);
  const Profile& prof = *term.profile;
  double sum = 0.0;
  if (dim == 1) {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      double u = rule.nodes[i] * r;
      double pv = prof.value(vec1(u));
      if (pv == 0.0) continue;
      Vec y = vec1(term.center[0] + term.scale * u);
      sum += rule.weights[i] * pv * dens(y);
    }
    sum *= r;
  } else {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      double u0 = rule.nodes[i] * r;
      double row = 0.0;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        double u1 = rule.nodes[j] * r;
        double pv = prof.value(vec2(u0, u1));
        if (pv == 0.0) continue;
        Vec y = vec2(term.center[0] + term.scale * u0, term.center[1] + term.scale * u1);
        row += rule.weights[j] * pv * dens(y);
      }
      sum += rule.weights[i] * row;
    }
    sum *= r * r;
  }
  // scale^{-d} from the profile placement cancels against scale^{d} from dy.
  return term.coeff * sum;
}

double pair_density(const std::function<double(const Vec&)>& dens, const Integrand& f,
                    const OpenSetDomain& domain, const QuadratureSpec& spec, double dens_osc,
                    PairFlags* flags) {
  const auto* tf = dynamic_cast<const TestFunction*>(&f);
  if (tf != nullptr) {
    double total = 0.0;
    for (const TestTerm& term : tf->terms()) {
      Box ball = term.support();
      if (domain.contains_box(ball)) {
        total += pair_density_term(dens, term, tf->dim(), spec, dens_osc);
      } else {
        if (flags) flags->support_clipped = true;
        Box region = intersect(ball, domain.bounding_box());
        if (region.empty()) continue;
        const TestTerm* tp = &term;
        int d = tf->dim();
        total += integrate_box(region, spec, [tp, d, &dens](const Vec& y) {
          Vec u = (y - tp->center) * (1.0 / tp->scale);
          if (u.norm2() >= tp->profile->radius() * tp->profile->radius()) return 0.0;
          return dens(y) * tp->coeff * std::pow(tp->scale, -d) * tp->profile->value(u);
        }, dens_osc);
      }
    }
    return total;
  }
  Box region = f.support();
  if (!domain.contains_box(region)) {
    if (flags) flags->support_clipped = true;
    region = intersect(region, domain.bounding_box());
  }
  if (region.empty()) return 0.0;
  double osc = std::max(dens_osc, f.osc_freq());
  return integrate_box(region, spec, [&](const Vec& y) { return dens(y) * f.value(y); }, osc);
}

}  // namespace

double PairingOracle::pair(const Integrand& f, const QuadratureSpec& spec,
                           PairFlags* flags) const {
  switch (backing_) {
    case Backing::SmoothDensity: {
      const SmoothFunction& u = density_;
      return pair_density([&u](const Vec& y) { return u.value(y); }, f, domain_, spec,
                          u.osc_freq(), flags);
    }
    case Backing::IndicatorDensity: {
      Box region = intersect(intersect(indicator_box_, f.support()), domain_.bounding_box());
      if (flags && !domain_.contains_box(f.support())) flags->support_clipped = true;
      if (region.empty()) return 0.0;
      return indicator_value_ *
             integrate_box(region, spec, [&f](const Vec& y) { return f.value(y); }, f.osc_freq());
    }
    case Backing::DiracComb: {
      double s = 0.0;
      Box box = f.support();
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (box.contains(atoms_[i])) s += atom_weights_[i] * f.value(atoms_[i]);
      return s;
    }
    case Backing::LacunarySeries: {
      double total = 0.0;
      for (int j = 0; j <= lac_J_; ++j) {
        double om = std::ldexp(1.0, j);
        double coeff = lac_derivative_ ? -std::pow(2.0, j * (1.0 - lac_a_))
                                       : std::pow(2.0, -j * lac_a_);
        auto wave = [om, deriv = lac_derivative_](const Vec& y) {
          return deriv ? std::sin(om * y[0]) : std::cos(om * y[0]);
        };
        total += coeff * pair_density(wave, f, domain_, spec, om, flags);
      }
      return total;
    }
    case Backing::Pushforward: {
      GenericIntegrand g = compose_with(f, map_);
      return inner_->pair(g, spec, flags);
    }
    case Backing::LinearCombination: {
      double s = 0.0;
      for (const auto& [c, o] : combo_) s += c * o->pair(f, spec, flags);
      return s;
    }
  }
  return 0.0;
}

PairingOracle pushforward_chart(const PairingOracle& t, const Diffeo& phi) {
  if (!phi.complete())
    fail_config("pushforward requires forward, inverse and Jacobian evaluators");
  OpenSetDomain image_domain =
      t.domain().unbounded() ? t.domain()
                             : OpenSetDomain::box(phi.map_box_forward(t.domain().bounding_box()));
  switch (t.backing()) {
    case PairingOracle::Backing::SmoothDensity: {
      SmoothFunction u = t.density_;
      auto inv = phi.inverse;
      auto det = phi.jac_det_inverse;
      OpenSetDomain dom = t.domain();
      SmoothFunction moved = SmoothFunction::custom(
          [u, inv, det, dom](const Vec& y) {
            Vec x = inv(y);
            if (!dom.contains(x)) return 0.0;
            return u.value(x) * det(y);
          },
          "pushforward(" + u.label() + ")");
      return PairingOracle::smooth_density(std::move(moved), image_domain);
    }
    case PairingOracle::Backing::IndicatorDensity: {
      // Affine maps send boxes to boxes; detect by mapping and checking volume.
      Box image = phi.map_box_forward(t.indicator_box_);
      auto inv = phi.inverse;
      auto det = phi.jac_det_inverse;
      Box b = t.indicator_box_;
      double v = t.indicator_value_;
      SmoothFunction moved = SmoothFunction::custom(
          [b, v, inv, det](const Vec& y) {
            Vec x = inv(y);
            if (!b.contains(x)) return 0.0;
            return v * det(y);
          },
          "pushforward(indicator)");
      (void)image;
      return PairingOracle::smooth_density(std::move(moved), image_domain);
    }
    case PairingOracle::Backing::DiracComb: {
      std::vector<Vec> moved;
      moved.reserve(t.atoms_.size());
      for (const Vec& a : t.atoms_) moved.push_back(phi.forward(a));
      return PairingOracle::dirac_comb(std::move(moved), t.atom_weights_, image_domain);
    }
    case PairingOracle::Backing::LinearCombination: {
      std::vector<std::pair<double, PairingOracle>> parts;
      for (const auto& [c, o] : t.combo_) parts.emplace_back(c, pushforward_chart(*o, phi));
      return PairingOracle::linear_combination(std::move(parts));
    }
    default: {
      PairingOracle w;
      w.backing_ = PairingOracle::Backing::Pushforward;
      w.inner_ = std::make_shared<PairingOracle>(t);
      w.map_ = phi;
      w.domain_ = image_domain;
      return w;
    }
  }
}

PairingOracle pullback_chart(const PairingOracle& s, const Diffeo& chi) {
  return pushforward_chart(s, chi.inverted());
}

}  // namespace germlab
