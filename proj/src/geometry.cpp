// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "anisoeig/error.hpp"

namespace anisoeig {

Curve Curve::segment(Point2 a, Point2 b) {
  ANISOEIG_REQUIRE(!(a == b), ErrorCode::InvalidGeometry, "Curve::segment: zero length");
  Curve c;
  c.kind_ = Kind::Segment;
  c.points_ = {a, b};
  return c;
}

Curve Curve::arc(Point2 center, double radius, double theta0, double theta1) {
  ANISOEIG_REQUIRE(radius > 0.0 && theta0 != theta1, ErrorCode::InvalidGeometry,
                   "Curve::arc: degenerate arc");
  Curve c;
  c.kind_ = Kind::Arc;
  c.center_ = center;
  c.radius_ = radius;
  c.theta0_ = theta0;
  c.theta1_ = theta1;
  return c;
}

Curve Curve::polyline(std::vector<Point2> points) {
  ANISOEIG_REQUIRE(points.size() >= 2, ErrorCode::InvalidGeometry,
                   "Curve::polyline: need at least two points");
  Curve c;
  c.kind_ = Kind::Polyline;
  c.cumulative_.assign(1, 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double len = distance(points[i - 1], points[i]);
    ANISOEIG_REQUIRE(len > 0.0, ErrorCode::InvalidGeometry,
                     "Curve::polyline: repeated point");
    c.cumulative_.push_back(c.cumulative_.back() + len);
  }
  c.points_ = std::move(points);
  return c;
}

Point2 Curve::point(double t) const {
  switch (kind_) {
    case Kind::Segment:
      return points_[0] + t * (points_[1] - points_[0]);
    case Kind::Arc: {
      if (t == 0.0) return center_ + radius_ * Point2{std::cos(theta0_), std::sin(theta0_)};
      if (t == 1.0) return center_ + radius_ * Point2{std::cos(theta1_), std::sin(theta1_)};
      const double th = theta0_ + t * (theta1_ - theta0_);
      return center_ + radius_ * Point2{std::cos(th), std::sin(th)};
    }
    case Kind::Polyline: {
      const double s = std::clamp(t, 0.0, 1.0) * cumulative_.back();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
      std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
          1, std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                      static_cast<std::ptrdiff_t>(cumulative_.size()) - 1)));
      const double seg = cumulative_[i] - cumulative_[i - 1];
      const double u = (s - cumulative_[i - 1]) / seg;
      if (u == 1.0) return points_[i];
      return points_[i - 1] + u * (points_[i] - points_[i - 1]);
    }
  }
  return {};
}

Point2 Curve::derivative(double t) const {
  switch (kind_) {
    case Kind::Segment:
      return points_[1] - points_[0];
    case Kind::Arc: {
      const double dth = theta1_ - theta0_;
      const double th = theta0_ + t * dth;
      return radius_ * dth * Point2{-std::sin(th), std::cos(th)};
    }
    case Kind::Polyline: {
      const double s = std::clamp(t, 0.0, 1.0) * cumulative_.back();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
      std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
          1, std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                      static_cast<std::ptrdiff_t>(cumulative_.size()) - 1)));
      const Point2 d = points_[i] - points_[i - 1];
      return d * (cumulative_.back() / (cumulative_[i] - cumulative_[i - 1]));
    }
  }
  return {};
}

double Curve::length() const {
  switch (kind_) {
    case Kind::Segment: return distance(points_[0], points_[1]);
    case Kind::Arc: return radius_ * std::abs(theta1_ - theta0_);
    case Kind::Polyline: return cumulative_.back();
  }
  return 0.0;
}

std::vector<double> Curve::equal_arclength_params(int pieces) const {
  ANISOEIG_REQUIRE(pieces >= 1, ErrorCode::InvalidInput,
                   "equal_arclength_params: need at least one piece");
  // All supported curve kinds are parametrized proportionally to arc length.
  std::vector<double> t(static_cast<std::size_t>(pieces) + 1);
  for (int i = 0; i <= pieces; ++i) t[static_cast<std::size_t>(i)] = double(i) / pieces;
  return t;
}

Geometry::Geometry(std::vector<Curve> curves, GeometryMode mode)
    : curves_(std::move(curves)), mode_(mode) {
  ANISOEIG_REQUIRE(!curves_.empty(), ErrorCode::InvalidGeometry, "Geometry: no curves");
  const double scale = perimeter();
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    const Point2 end = curves_[i].end();
    const Point2 next = curves_[(i + 1) % curves_.size()].start();
    ANISOEIG_REQUIRE(distance(end, next) <= 1e-12 * scale, ErrorCode::InvalidGeometry,
                     "Geometry: boundary loop is not closed at curve " + std::to_string(i));
    corners_.push_back(curves_[i].start());
  }
  // Self-intersection check on a polyline sampling of the loop.
  const auto pts = sample(32);
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = pts[i], b = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Point2 c = pts[j], d = pts[(j + 1) % n];
      const double o1 = orient(a, b, c), o2 = orient(a, b, d);
      const double o3 = orient(c, d, a), o4 = orient(c, d, b);
      if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
        fail(ErrorCode::InvalidGeometry, "Geometry: boundary loop self-intersects");
      }
    }
  }
  ANISOEIG_REQUIRE(area() > 0.0, ErrorCode::InvalidGeometry,
                   "Geometry: boundary loop must be counterclockwise");
}

Geometry Geometry::frozen_polygon(std::span<const Point2> points) {
  ANISOEIG_REQUIRE(points.size() >= 3, ErrorCode::InvalidGeometry,
                   "Geometry::frozen_polygon: need at least three points");
  std::vector<Curve> curves;
  curves.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    curves.push_back(Curve::segment(points[i], points[(i + 1) % points.size()]));
  }
  return Geometry(std::move(curves), GeometryMode::FrozenPolygon);
}

double Geometry::perimeter() const {
  double p = 0.0;
  for (const auto& c : curves_) p += c.length();
  return p;
}

std::vector<Point2> Geometry::sample(int per_curve) const {
  std::vector<Point2> pts;
  for (const auto& c : curves_) {
    const int n = c.kind() == Curve::Kind::Segment ? 1 : per_curve;
    for (int i = 0; i < n; ++i) pts.push_back(c.point(double(i) / n));
  }
  return pts;
}

double Geometry::area() const {
  // Green's theorem, exact for every curve kind.
  double twice = 0.0;
  for (const auto& c : curves_) {
    switch (c.kind()) {
      case Curve::Kind::Segment:
        twice += cross(c.start(), c.end());
        break;
      case Curve::Kind::Arc: {
        const Point2 cen = c.center_;
        const double r = c.radius_, t0 = c.theta0_, t1 = c.theta1_;
        twice += r * cen.x * (std::sin(t1) - std::sin(t0)) - r * cen.y * (std::cos(t1) - std::cos(t0)) +
                 r * r * (t1 - t0);
        break;
      }
      case Curve::Kind::Polyline:
        for (std::size_t i = 1; i < c.points_.size(); ++i) twice += cross(c.points_[i - 1], c.points_[i]);
        break;
    }
  }
  return 0.5 * twice;
}

double Geometry::diameter() const {
  const auto pts = sample(128);
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, distance(pts[i], pts[j]));
  return d;
}

bool Geometry::contains(const Point2& p) const {
  const auto pts = sample(1024);
  bool inside = false;
  for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
    const Point2 a = pts[i], b = pts[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace anisoeig
