// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "anisoeig/point.hpp"

namespace anisoeig {

enum class GeometryMode { ExactCurve, FrozenPolygon };

/// A boundary piece parametrized over t in [0, 1].
class Curve {
 public:
  enum class Kind { Segment, Arc, Polyline };

  static Curve segment(Point2 a, Point2 b);
  /// Counterclockwise when theta1 > theta0.
  static Curve arc(Point2 center, double radius, double theta0, double theta1);
  static Curve polyline(std::vector<Point2> points);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] Point2 point(double t) const;
  [[nodiscard]] Point2 derivative(double t) const;
  [[nodiscard]] double length() const;
  /// Parameter values splitting the curve into n pieces of equal arc length.
  [[nodiscard]] std::vector<double> equal_arclength_params(int pieces) const;
  [[nodiscard]] Point2 start() const { return point(0.0); }
  [[nodiscard]] Point2 end() const { return point(1.0); }

 private:
  friend class Geometry;
  Curve() = default;

  Kind kind_ = Kind::Segment;
  std::vector<Point2> points_;  // segment: 2, polyline: >= 2
  Point2 center_;
  double radius_ = 0.0;
  double theta0_ = 0.0;
  double theta1_ = 0.0;
  std::vector<double> cumulative_;  // polyline arc length prefix sums
};

/// Closed boundary loop made of curves traversed counterclockwise; curve i
/// ends where curve i+1 starts. Every junction is a corner.
class Geometry {
 public:
  Geometry(std::vector<Curve> curves, GeometryMode mode = GeometryMode::ExactCurve);

  /// Polygon through the given counterclockwise points, each one a corner.
  static Geometry frozen_polygon(std::span<const Point2> points);

  [[nodiscard]] const std::vector<Curve>& curves() const noexcept { return curves_; }
  [[nodiscard]] const Curve& curve(int tag) const { return curves_.at(static_cast<std::size_t>(tag)); }
  [[nodiscard]] int curve_count() const noexcept { return static_cast<int>(curves_.size()); }
  /// corners()[i] is the start point of curve i.
  [[nodiscard]] const std::vector<Point2>& corners() const noexcept { return corners_; }
  [[nodiscard]] GeometryMode mode() const noexcept { return mode_; }
  [[nodiscard]] double perimeter() const;
  /// Polyline sampling of the boundary, used for area, containment and diameter.
  [[nodiscard]] std::vector<Point2> sample(int per_curve = 256) const;
  [[nodiscard]] double area() const;
  [[nodiscard]] double diameter() const;
  [[nodiscard]] bool contains(const Point2& p) const;

 private:
  std::vector<Curve> curves_;
  std::vector<Point2> corners_;
  GeometryMode mode_;
};

}  // namespace anisoeig
