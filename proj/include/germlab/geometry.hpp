#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "germlab/error.hpp"

namespace germlab {

/// A point in R^d, d in {1, 2}.
struct Vec {
  int dim = 1;
  std::array<double, 2> c{0.0, 0.0};

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  Vec operator+(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < dim; ++i) r[i] += o[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < dim; ++i) r[i] -= o[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r = *this;
    for (int i = 0; i < dim; ++i) r[i] *= s;
    return r;
  }
  double norm2() const {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec vec1(double x) { return Vec{1, {x, 0.0}}; }
inline Vec vec2(double x, double y) { return Vec{2, {x, y}}; }
inline Vec zero_vec(int dim) { return Vec{dim, {0.0, 0.0}}; }

inline double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

/// Axis-aligned box, the compact-set and support currency of the library.
struct Box {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};

  static Box interval(double a, double b) { return Box{1, {a, 0.0}, {b, 0.0}}; }
  static Box rect(double ax, double bx, double ay, double by) { return Box{2, {ax, ay}, {bx, by}}; }
  static Box ball_box(const Vec& center, double radius) {
    Box b;
    b.dim = center.dim;
    for (int i = 0; i < b.dim; ++i) {
      b.lo[static_cast<std::size_t>(i)] = center[i] - radius;
      b.hi[static_cast<std::size_t>(i)] = center[i] + radius;
    }
    return b;
  }

  double width(int axis) const { return hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)]; }
  double min_width() const {
    double w = width(0);
    for (int i = 1; i < dim; ++i) w = std::min(w, width(i));
    return w;
  }
  Vec center() const {
    Vec p = zero_vec(dim);
    for (int i = 0; i < dim; ++i) p[i] = 0.5 * (lo[static_cast<std::size_t>(i)] + hi[static_cast<std::size_t>(i)]);
    return p;
  }
  bool contains(const Vec& p, double slack = 0.0) const {
    for (int i = 0; i < dim; ++i) {
      if (p[i] < lo[static_cast<std::size_t>(i)] - slack || p[i] > hi[static_cast<std::size_t>(i)] + slack)
        return false;
    }
    return true;
  }
  bool contains_box(const Box& k, double slack = 0.0) const {
    for (int i = 0; i < dim; ++i) {
      if (k.lo[static_cast<std::size_t>(i)] < lo[static_cast<std::size_t>(i)] - slack) return false;
      if (k.hi[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)] + slack) return false;
    }
    return true;
  }
  bool empty() const {
    for (int i = 0; i < dim; ++i)
      if (width(i) <= 0.0) return true;
    return false;
  }
  Box shrunk(double margin) const {
    Box b = *this;
    for (int i = 0; i < dim; ++i) {
      b.lo[static_cast<std::size_t>(i)] += margin;
      b.hi[static_cast<std::size_t>(i)] -= margin;
    }
    return b;
  }
  Box enlarged(double margin) const { return shrunk(-margin); }
};

inline Box intersect(const Box& a, const Box& b) {
  Box r = a;
  for (int i = 0; i < a.dim; ++i) {
    r.lo[static_cast<std::size_t>(i)] = std::max(a.lo[static_cast<std::size_t>(i)], b.lo[static_cast<std::size_t>(i)]);
    r.hi[static_cast<std::size_t>(i)] = std::min(a.hi[static_cast<std::size_t>(i)], b.hi[static_cast<std::size_t>(i)]);
  }
  return r;
}

/// Open subset of R^d: a box, a ball, or the whole space.
class OpenSetDomain {
 public:
  enum class Kind { Box, Ball, WholeSpace };

  static OpenSetDomain box(const Box& b) {
    OpenSetDomain d;
    d.kind_ = Kind::Box;
    d.box_ = b;
    d.dim_ = b.dim;
    return d;
  }
  static OpenSetDomain ball(const Vec& center, double radius) {
    OpenSetDomain d;
    d.kind_ = Kind::Ball;
    d.center_ = center;
    d.radius_ = radius;
    d.dim_ = center.dim;
    d.box_ = Box::ball_box(center, radius);
    return d;
  }
  static OpenSetDomain whole_space(int dim) {
    OpenSetDomain d;
    d.kind_ = Kind::WholeSpace;
    d.dim_ = dim;
    double big = 1e30;
    d.box_ = dim == 1 ? Box::interval(-big, big) : Box::rect(-big, big, -big, big);
    return d;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool unbounded() const { return kind_ == Kind::WholeSpace; }

  /// Bounding box (a huge box for the whole space).
  const Box& bounding_box() const { return box_; }

  bool contains(const Vec& p) const {
    switch (kind_) {
      case Kind::WholeSpace: return true;
      case Kind::Box: return box_.contains(p);
      case Kind::Ball: return distance(p, center_) < radius_;
    }
    return false;
  }

  /// Distance from a point inside the set to the boundary (0 outside).
  double boundary_distance(const Vec& p) const {
    switch (kind_) {
      case Kind::WholeSpace: return std::numeric_limits<double>::infinity();
      case Kind::Ball: return std::max(0.0, radius_ - distance(p, center_));
      case Kind::Box: {
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i) {
          d = std::min(d, p[i] - box_.lo[static_cast<std::size_t>(i)]);
          d = std::min(d, box_.hi[static_cast<std::size_t>(i)] - p[i]);
        }
        return std::max(0.0, d);
      }
    }
    return 0.0;
  }

  /// D_K = dist(boundary, K) for a compact box K inside the set.
  double compact_margin(const Box& k) const {
    if (kind_ == Kind::WholeSpace) return std::numeric_limits<double>::infinity();
    double d = std::numeric_limits<double>::infinity();
    if (kind_ == Kind::Box) {
      for (int i = 0; i < dim_; ++i) {
        d = std::min(d, k.lo[static_cast<std::size_t>(i)] - box_.lo[static_cast<std::size_t>(i)]);
        d = std::min(d, box_.hi[static_cast<std::size_t>(i)] - k.hi[static_cast<std::size_t>(i)]);
      }
    } else {
      // ball: max distance from the center to a corner of K
      double worst = 0.0;
      int corners = 1 << dim_;
      for (int m = 0; m < corners; ++m) {
        Vec corner = zero_vec(dim_);
        for (int i = 0; i < dim_; ++i)
          corner[i] = (m >> i) & 1 ? k.hi[static_cast<std::size_t>(i)] : k.lo[static_cast<std::size_t>(i)];
        worst = std::max(worst, distance(corner, center_));
      }
      d = radius_ - worst;
    }
    if (d <= 0.0) fail_domain("compact set is not strictly inside the open set");
    return d;
  }

  bool contains_box(const Box& k) const {
    if (kind_ == Kind::WholeSpace) return true;
    if (kind_ == Kind::Box) return box_.contains_box(k);
    int corners = 1 << dim_;
    for (int m = 0; m < corners; ++m) {
      Vec corner = zero_vec(dim_);
      for (int i = 0; i < dim_; ++i)
        corner[i] = (m >> i) & 1 ? k.hi[static_cast<std::size_t>(i)] : k.lo[static_cast<std::size_t>(i)];
      if (!contains(corner)) return false;
    }
    return true;
  }

  /// True when V lies inside this set (boxes compared exactly, balls via corners).
  bool covers(const OpenSetDomain& v) const {
    if (kind_ == Kind::WholeSpace) return true;
    if (v.kind_ == Kind::WholeSpace) return false;
    return contains_box(v.bounding_box()) ||
           (kind_ == Kind::Box && box_.contains_box(v.bounding_box(), 1e-14));
  }

 private:
  Kind kind_ = Kind::WholeSpace;
  int dim_ = 1;
  Box box_;
  Vec center_;
  double radius_ = 0.0;
};

}  // namespace germlab
