// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "anisoeig/error.hpp"
#include "anisoeig/geometry.hpp"
#include "anisoeig/mesh.hpp"
#include "test_support.hpp"

namespace anisoeig {
namespace {

double shoelace(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Geometry sector_geometry() {
  const double pi = std::acos(-1.0);
  return Geometry({Curve::segment({0, 0}, {1, 0}), Curve::arc({0, 0}, 1.0, 0.0, 1.5 * pi),
                   Curve::segment({0, -1}, {0, 0})});
}

Geometry lshape_geometry() {
  const std::vector<Point2> pts{{-1, -1}, {0, -1}, {0, 0}, {1, 0}, {1, 1}, {-1, 1}};
  return Geometry::frozen_polygon(pts);
}

void check_invariants(const TriMesh& m) {
  double sum = 0;
  for (int t = 0; t < m.triangle_count(); ++t) {
    EXPECT_GT(m.area(t), 0.0);
    sum += m.area(t);
  }
  EXPECT_NEAR(sum, m.boundary_polygon_area(), 1e-10 * sum);
  EXPECT_EQ(m.vertex_count() - m.edge_count() + m.triangle_count(), 1);
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto map = affine_map(m, t);
    const auto ref = reference_element();
    const auto phys = m.corners_of(t);
    const double scale = m.diameter();
    for (int i = 0; i < 3; ++i) EXPECT_LE(distance(map(ref[i]), phys[i]), 1e-12 * scale);
    EXPECT_NEAR(map.jacobian.det(), m.area(t), 1e-12 * m.area(t));
  }
}

TEST(ReferenceElement, UnitAreaEquilateral) {
  const auto r = reference_element();
  const double a = 2.0 / std::pow(3.0, 0.25);
  EXPECT_NEAR(shoelace(r[0], r[1], r[2]), 1.0, 1e-15);
  EXPECT_NEAR(distance(r[0], r[1]), a, 1e-15);
  EXPECT_NEAR(distance(r[1], r[2]), a, 1e-15);
  EXPECT_NEAR(distance(r[2], r[0]), a, 1e-15);
  EXPECT_NEAR(a, 1.5197, 1e-4);
  EXPECT_NEAR(reference_edge_length(), a, 1e-15);
  const Point2 c = (r[0] + r[1] + r[2]) * (1.0 / 3.0);
  EXPECT_NEAR(c.x, a / 2, 1e-15);
  EXPECT_NEAR(c.y, a * std::sqrt(3.0) / 6, 1e-15);
}

TEST(AffineMap, ReferenceAndScaledElements) {
  const auto r = reference_element();
  const auto id = affine_map(r[0], r[1], r[2]);
  EXPECT_NEAR(id.jacobian.m00, 1.0, 1e-15);
  EXPECT_NEAR(id.jacobian.m01, 0.0, 1e-15);
  EXPECT_NEAR(id.jacobian.m10, 0.0, 1e-15);
  EXPECT_NEAR(id.jacobian.m11, 1.0, 1e-15);

  const double s = 3.5;
  const auto sc = affine_map(r[0] * s, r[1] * s, r[2] * s);
  EXPECT_NEAR(sc.jacobian.m00, s, 1e-14);
  EXPECT_NEAR(sc.jacobian.m01, 0.0, 1e-14);
  EXPECT_NEAR(sc.jacobian.m11, s, 1e-14);
  EXPECT_NEAR(sc.jacobian.det(), s * s, 1e-13);
}

TEST(AffineMap, DeterminantMatchesShoelace) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    Point2 p[3];
    for (auto& q : p) q = {testing::uniform(rng, -5, 5), testing::uniform(rng, -5, 5)};
    double area = shoelace(p[0], p[1], p[2]);
    if (std::abs(area) < 1e-3) continue;
    if (area < 0) std::swap(p[1], p[2]), area = -area;
    const auto map = affine_map(p[0], p[1], p[2]);
    EXPECT_NEAR(map.jacobian.det(), area, 1e-12 * area);
    const auto r = reference_element();
    for (int k = 0; k < 3; ++k) EXPECT_LE(distance(map(r[k]), p[k]), 1e-12 * 10);
  }
}

TEST(AffineMap, DegenerateTriangleFails) {
  try {
    affine_map(Point2{0, 0}, Point2{1, 1}, Point2{2, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateElement);
  }
}

TEST(TriMesh, RejectsInvertedTriangle) {
  std::vector<Point2> pts{{0, 0}, {1, 0}, {0, 1}};
  std::vector<VertexInfo> info(3, VertexInfo{VertexKind::Corner});
  std::vector<BoundaryEdge> be{{0, 1, 0, 0, 1}, {1, 2, 1, 0, 1}, {2, 0, 2, 0, 1}};
  EXPECT_NO_THROW(TriMesh(pts, {{0, 1, 2}}, info, be));
  EXPECT_THROW(TriMesh(pts, {{0, 2, 1}}, info, be), Error);
}

TEST(VertexPatch, StructuredInteriorVertex) {
  const TriMesh m = testing::structured_rectangle(6, 6);
  const int v = 3 * 7 + 3;
  EXPECT_EQ(m.vertex_triangles(v).size(), 6u);
  const auto r1 = vertex_patch(m, v, 1);
  EXPECT_EQ(r1.size(), 6u);
  EXPECT_TRUE(std::is_sorted(r1.begin(), r1.end()));
  const auto r2 = vertex_patch(m, v, 2);
  EXPECT_EQ(r2.size(), 18u);
  EXPECT_TRUE(std::is_sorted(r2.begin(), r2.end()));
  EXPECT_EQ(std::count(r2.begin(), r2.end(), v), 0);
}

TEST(VertexPatch, TwoTriangleSquareCorners) {
  const TriMesh m = testing::structured_rectangle(1, 1);
  // diagonal runs from vertex 0 to vertex 3
  EXPECT_EQ(vertex_patch(m, 0, 1).size(), 3u);
  EXPECT_EQ(vertex_patch(m, 3, 1).size(), 3u);
  EXPECT_EQ(vertex_patch(m, 1, 1).size(), 2u);
  EXPECT_EQ(vertex_patch(m, 2, 1).size(), 2u);
}

TEST(Locate, CentroidsVerticesAndRandomPoints) {
  const TriMesh m = testing::structured_rectangle(5, 4, -1, 2, 0, 1);
  for (int t = 0; t < m.triangle_count(); ++t) {
    const Location loc = locate(m, m.centroid(t));
    EXPECT_EQ(loc.triangle, t);
    for (double b : loc.bary) EXPECT_NEAR(b, 1.0 / 3.0, 1e-12);
  }
  for (int v = 0; v < m.vertex_count(); ++v) {
    const Location loc = locate(m, m.vertex(v));
    const auto& tri = m.triangle(loc.triangle);
    bool hit = false;
    for (int i = 0; i < 3; ++i)
      if (tri[i] == v) {
        EXPECT_NEAR(loc.bary[i], 1.0, 1e-12);
        hit = true;
      }
    EXPECT_TRUE(hit);
  }
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Point2 p{testing::uniform(rng, -1, 2), testing::uniform(rng, 0, 1)};
    const Location loc = locate(m, p);
    const auto c = m.corners_of(loc.triangle);
    double sum = 0;
    Point2 q{0, 0};
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(loc.bary[k], -1e-9);
      EXPECT_LE(loc.bary[k], 1 + 1e-9);
      sum += loc.bary[k];
      q = q + c[k] * loc.bary[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LE(distance(p, q), 1e-10);
  }
}

TEST(Locate, OutsidePointReportsNearest) {
  const TriMesh m = testing::structured_rectangle(3, 3);
  try {
    locate(m, {1.5, 0.5});
    FAIL();
  } catch (const NotFoundError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
    ASSERT_GE(e.nearest_triangle(), 0);
    const auto c = m.centroid(e.nearest_triangle());
    EXPECT_GT(c.x, 2.0 / 3.0);
  }
}

TEST(InitialMesh, SquareWithCornersOnly) {
  const TriMesh m = initial_mesh(testing::unit_square_geometry(), 4, 10.0);
  EXPECT_EQ(m.vertex_count(), 4);
  EXPECT_EQ(m.triangle_count(), 2);
  EXPECT_EQ(m.boundary_edges().size(), 4u);
  check_invariants(m);
}

TEST(InitialMesh, SectorBoundarySpacing) {
  const Geometry g = sector_geometry();
  const TriMesh m = initial_mesh(g, 30, 0.15);
  EXPECT_EQ(m.boundary_edges().size(), 30u);
  int corners = 0;
  for (const auto& vi : m.vertex_info()) corners += vi.kind == VertexKind::Corner;
  EXPECT_EQ(corners, 3);
  const double pi = std::acos(-1.0);
  const double perimeter = 2 + 1.5 * pi;
  EXPECT_NEAR(g.perimeter(), perimeter, 1e-12);
  double max_gap = 0;
  for (const auto& e : m.boundary_edges()) {
    const double arc = g.curve(e.curve).length() * (e.t1 - e.t0);
    max_gap = std::max(max_gap, arc);
  }
  // near-equal spacing: the largest gap stays within a third of the mean
  EXPECT_LE(max_gap, perimeter / 30 * 1.35);
  EXPECT_GE(max_gap, perimeter / 30 * 0.99);
  for (const auto& e : m.boundary_edges()) {
    const Point2 p = g.curve(e.curve).point(e.t0);
    EXPECT_LE(distance(p, m.vertex(e.v0)), 1e-12);
  }
  check_invariants(m);
  EXPECT_NEAR(m.total_area(), g.area(), 0.05 * g.area());
}

TEST(InitialMesh, LShapeCornersOnly) {
  const TriMesh m = initial_mesh(lshape_geometry(), 6, 10.0);
  EXPECT_EQ(m.vertex_count(), 6);
  EXPECT_EQ(m.boundary_edges().size(), 6u);
  EXPECT_EQ(m.triangle_count(), 4);
  EXPECT_NEAR(m.total_area(), 3.0, 1e-14);
  check_invariants(m);
}

TEST(InitialMesh, LShapeWithInterior) {
  const TriMesh m = initial_mesh(lshape_geometry(), 48, 0.1);
  EXPECT_NEAR(m.total_area(), 3.0, 1e-12);
  check_invariants(m);
  int interior = 0;
  for (const auto& vi : m.vertex_info()) interior += vi.kind == VertexKind::Interior;
  EXPECT_GT(interior, 100);
}

TEST(InitialMesh, TooFewBoundaryPointsFails) {
  EXPECT_THROW(initial_mesh(lshape_geometry(), 5, 0.1), Error);
}

TEST(Geometry, SelfIntersectingFails) {
  const std::vector<Point2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  try {
    Geometry::frozen_polygon(bowtie);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGeometry);
  }
}

TEST(Geometry, AreasAndContainment) {
  const double pi = std::acos(-1.0);
  EXPECT_NEAR(sector_geometry().area(), 0.75 * pi, 1e-12);
  EXPECT_NEAR(lshape_geometry().area(), 3.0, 1e-14);
  EXPECT_TRUE(lshape_geometry().contains({-0.5, -0.5}));
  EXPECT_FALSE(lshape_geometry().contains({0.5, -0.5}));
}

TEST(NativeFormat, RoundTrip) {
  const TriMesh m = initial_mesh(sector_geometry(), 24, 0.2);
  std::stringstream ss;
  write_native(ss, m);
  const TriMesh r = read_native(ss);
  ASSERT_EQ(r.vertex_count(), m.vertex_count());
  ASSERT_EQ(r.triangle_count(), m.triangle_count());
  for (int v = 0; v < m.vertex_count(); ++v) {
    EXPECT_EQ(r.vertex(v).x, m.vertex(v).x);
    EXPECT_EQ(r.vertex(v).y, m.vertex(v).y);
    EXPECT_EQ(r.vertex_info()[v].kind, m.vertex_info()[v].kind);
    EXPECT_EQ(r.vertex_info()[v].param, m.vertex_info()[v].param);
  }
  for (int t = 0; t < m.triangle_count(); ++t) EXPECT_EQ(r.triangle(t), m.triangle(t));
  ASSERT_EQ(r.boundary_edges().size(), m.boundary_edges().size());
}

TEST(NativeFormat, MalformedInputFails) {
  std::stringstream bad("tri-mesh 2\n3\n0 0 corner\n1 0 corner\n");
  try {
    read_native(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
  }
  std::stringstream header("tri-mesh 3\n");
  EXPECT_THROW(read_native(header), Error);
}

TEST(Vtk, ContainsPointData) {
  const TriMesh m = testing::structured_rectangle(2, 2);
  std::vector<double> f(static_cast<std::size_t>(m.vertex_count()), 1.5);
  std::vector<PointField> fields{{"eigfun_1", f}};
  std::stringstream ss;
  write_vtk(ss, m, fields);
  const std::string s = ss.str();
  EXPECT_NE(s.find("# vtk DataFile Version 3.0"), std::string::npos);
  EXPECT_NE(s.find("POINTS 9"), std::string::npos);
  EXPECT_NE(s.find("CELLS 8 32"), std::string::npos);
  EXPECT_NE(s.find("POINT_DATA 9"), std::string::npos);
  EXPECT_NE(s.find("SCALARS eigfun_1"), std::string::npos);
}

}  // namespace
}  // namespace anisoeig
