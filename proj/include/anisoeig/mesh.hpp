// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anisoeig/error.hpp"
#include "anisoeig/geometry.hpp"
#include "anisoeig/point.hpp"
#include "anisoeig/sym2.hpp"

namespace anisoeig {

enum class VertexKind { Interior, Boundary, Corner };

struct VertexInfo {
  VertexKind kind = VertexKind::Interior;
  int curve = -1;      ///< Boundary vertices only.
  double param = 0.0;  ///< Curve parameter of a Boundary vertex.
};

/// Boundary edge oriented along the counterclockwise loop (domain on the left).
struct BoundaryEdge {
  int v0 = 0;
  int v1 = 0;
  int curve = 0;
  double t0 = 0.0;
  double t1 = 0.0;
};

using Triangle = std::array<int, 3>;

/// Conforming, counterclockwise triangulation. Immutable; the constructor
/// checks orientation, edge-manifoldness, closed boundary loops and curve
/// parameter monotonicity.
class TriMesh {
 public:
  TriMesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
          std::vector<VertexInfo> vertex_info, std::vector<BoundaryEdge> boundary_edges);

  [[nodiscard]] int vertex_count() const noexcept { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] int triangle_count() const noexcept { return static_cast<int>(triangles_.size()); }
  [[nodiscard]] const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  [[nodiscard]] const std::vector<VertexInfo>& vertex_info() const noexcept { return info_; }
  [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_; }
  [[nodiscard]] const Point2& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
  [[nodiscard]] const Triangle& triangle(int t) const { return triangles_[static_cast<std::size_t>(t)]; }
  [[nodiscard]] std::array<Point2, 3> corners_of(int t) const;
  [[nodiscard]] double area(int t) const;
  [[nodiscard]] double total_area() const;
  [[nodiscard]] Point2 centroid(int t) const;
  [[nodiscard]] bool is_boundary_vertex(int v) const {
    return info_[static_cast<std::size_t>(v)].kind != VertexKind::Interior;
  }
  /// Triangles incident to v, ascending.
  [[nodiscard]] std::span<const int> vertex_triangles(int v) const;
  [[nodiscard]] int edge_count() const noexcept { return edge_count_; }
  /// Shoelace area of the boundary loop(s) formed by the boundary edges.
  [[nodiscard]] double boundary_polygon_area() const;
  [[nodiscard]] double diameter() const;

 private:
  std::vector<Point2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<VertexInfo> info_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<int> vt_offsets_;
  std::vector<int> vt_list_;
  int edge_count_ = 0;
};

/// Vertices (0,0), (a,0), (a/2, a sqrt(3)/2) with a = 2 / 3^{1/4}: the unit-area
/// equilateral reference triangle.
std::array<Point2, 3> reference_element();
double reference_edge_length();

/// x = jacobian * xi + translation maps the reference element onto K.
struct AffineMap {
  Mat2 jacobian;
  Point2 translation;

  [[nodiscard]] Point2 operator()(const Point2& xi) const { return jacobian.apply(xi) + translation; }
};

AffineMap affine_map(const Point2& p0, const Point2& p1, const Point2& p2);
AffineMap affine_map(const TriMesh& mesh, int triangle);

/// Vertices sharing a triangle with v (ring 1), or the union over those (ring 2);
/// v itself excluded, ascending order.
std::vector<int> vertex_patch(const TriMesh& mesh, int vertex, int ring);

struct Location {
  int triangle = -1;
  std::array<double, 3> bary{};
};

class NotFoundError : public Error {
 public:
  NotFoundError(const std::string& message, int nearest)
      : Error(ErrorCode::NotFound, message), nearest_(nearest) {}
  [[nodiscard]] int nearest_triangle() const noexcept { return nearest_; }

 private:
  int nearest_;
};

/// Bucket grid over triangle bounding boxes.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);

  /// Containing triangle with barycentrics in [-tol, 1 + tol].
  [[nodiscard]] std::optional<Location> find(const Point2& p, double tol = 1e-9) const;
  /// Nearest triangle, barycentrics of the nearest point of that triangle.
  [[nodiscard]] Location nearest(const Point2& p) const;

 private:
  [[nodiscard]] int cell_index(int ix, int iy) const { return iy * nx_ + ix; }
  [[nodiscard]] std::array<int, 2> cell_of(const Point2& p) const;

  const TriMesh* mesh_;
  Point2 lo_;
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> offsets_;
  std::vector<int> items_;
};

std::array<double, 3> barycentric(const std::array<Point2, 3>& tri, const Point2& p);

/// Throws NotFoundError (carrying the nearest triangle) outside the mesh.
Location locate(const TriMesh& mesh, const Point2& p);

/// Boundary points: every corner plus near-equal arc-length spacing per curve,
/// n_boundary points in total; interior filled from a lattice of spacing
/// interior_size; constrained Delaunay triangulation.
TriMesh initial_mesh(const Geometry& geometry, int n_boundary, double interior_size);

/// Counts of boundary segments per curve used by initial_mesh.
std::vector<int> boundary_allocation(const Geometry& geometry, int n_boundary);

/// Points of the boundary polygon of a mesh, following the boundary loop
/// starting at the lowest-index corner.
std::vector<Point2> boundary_loop(const TriMesh& mesh);

void write_native(std::ostream& os, const TriMesh& mesh);
TriMesh read_native(std::istream& is);

struct PointField {
  std::string name;
  std::span<const double> values;
};
void write_vtk(std::ostream& os, const TriMesh& mesh, std::span<const PointField> fields = {});

}  // namespace anisoeig
