// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "anisoeig/adapt.hpp"
#include "anisoeig/error.hpp"
#include "test_support.hpp"

namespace anisoeig {
namespace {

using testing::structured_rectangle;
using testing::unit_square_geometry;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double total_area(const TriMesh& m) {
  double s = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t) s += m.area(t);
  return s;
}

double element_diameter(const TriMesh& m, int t) {
  const auto c = m.corners_of(t);
  return std::max({distance(c[0], c[1]), distance(c[1], c[2]), distance(c[2], c[0])});
}

void expect_valid(const TriMesh& m) {
  for (int t = 0; t < m.triangle_count(); ++t) EXPECT_GT(m.area(t), 0.0);
  EXPECT_NEAR(total_area(m), m.boundary_polygon_area(), 1e-10 * m.boundary_polygon_area());
}

MetricFunction constant(const Sym2& m) {
  return [m](const Point2&) { return m; };
}

/// Constant metric scaled so that its volume over the unit square is n.
Sym2 with_volume(const Sym2& m, double n) { return m * (n / std::sqrt(m.det())); }

TEST(Remesh, UniformMeshWithMatchingIdentityMetricIsQuiescent) {
  const TriMesh mesh = structured_rectangle(16, 16);
  const MetricField target = normalize_to_target(mesh, identity_metric(mesh), mesh.triangle_count());
  RemeshStats stats;
  const TriMesh out = remesh(mesh, target, unit_square_geometry(), {}, &stats);
  EXPECT_LE(stats.passes, 2);
  EXPECT_NEAR(out.triangle_count(), mesh.triangle_count(), 0.2 * mesh.triangle_count());
  expect_valid(out);
}

TEST(Remesh, FourfoldVolumeQuadruplesElementCount) {
  const TriMesh mesh = structured_rectangle(16, 16);
  const double n = 4.0 * mesh.triangle_count();
  const MetricField target = normalize_to_target(mesh, identity_metric(mesh), n);
  EXPECT_NEAR(target.sigma_h, n, 1e-9 * n);
  const TriMesh out = remesh(mesh, target, unit_square_geometry());
  EXPECT_NEAR(out.triangle_count(), n, 0.25 * n);
  expect_valid(out);
}

TEST(Remesh, StretchedMetricGivesAlignedStretchedElements) {
  const TriMesh mesh = structured_rectangle(10, 10);
  const MetricFunction f = constant(with_volume(Sym2::diag(400, 1), 2000));
  const TriMesh out = remesh(mesh, f, unit_square_geometry());
  std::vector<double> aspect;
  int vertical = 0;
  for (int t = 0; t < out.triangle_count(); ++t) {
    aspect.push_back(aspect_ratio(out, t));
    const auto c = out.corners_of(t);
    Point2 longest = c[1] - c[0];
    for (const Point2& e : {c[2] - c[1], c[0] - c[2]})
      if (norm(e) > norm(longest)) longest = e;
    if (std::abs(longest.y) > std::abs(longest.x)) ++vertical;
  }
  EXPECT_GT(median(aspect), 15.0);
  EXPECT_LT(median(aspect), 27.0);
  EXPECT_GT(vertical, 0.9 * out.triangle_count());
  const QualityReport q = quality(out, sample_metric(out, f));
  EXPECT_LE(median(q.alignment), 1.5);
  expect_valid(out);
}

TEST(Remesh, QualityConstantsOnConstantMetrics) {
  std::mt19937_64 rng(7);
  const TriMesh mesh = structured_rectangle(8, 8);
  for (int trial = 0; trial < 6; ++trial) {
    const Sym2 m = with_volume(testing::random_spd(rng, 1.0, 50.0), 1500);
    const MetricFunction f = constant(m);
    const TriMesh out = remesh(mesh, f, unit_square_geometry());
    const QualityReport q = quality(out, sample_metric(out, f));
    EXPECT_LE(q.c_eq, 5.0) << "trial " << trial;
    EXPECT_LE(q.c_ali, 5.0) << "trial " << trial;
    for (double a : q.alignment) EXPECT_GE(a, 1.0 - 1e-12);
    EXPECT_NEAR(out.triangle_count(), 1500, 0.25 * 1500);
    expect_valid(out);
  }
}

TEST(Remesh, QualityConstantsOnSlowlyVaryingMetric) {
  const TriMesh mesh = structured_rectangle(8, 8);
  const MetricFunction f = [](const Point2& p) {
    const double s = 2000.0 * (1.0 + p.x);
    const double c = std::cos(p.y), d = std::sin(p.y);
    return Sym2{s * (4 * c * c + 0.25 * d * d), s * (4 - 0.25) * c * d, s * (4 * d * d + 0.25 * c * c)};
  };
  const TriMesh out = remesh(mesh, f, unit_square_geometry());
  const QualityReport q = quality(out, sample_metric(out, f));
  EXPECT_LE(q.c_eq, 5.0);
  EXPECT_LE(q.c_ali, 5.0);
  EXPECT_NEAR(out.triangle_count(), q.equidistribution.size(), 0);
  expect_valid(out);
}

TEST(Remesh, CornersStayAndCurvedBoundaryIsFollowed) {
  const EigenProblem p = problem_sector();
  AdaptConfig config;
  config.n_target = 400;
  const anisoeig::Setup s = initial_setup(p, config);
  const TriMesh out = remesh(s.mesh, constant(Sym2::diag(3000, 300)), s.geometry);
  expect_valid(out);
  for (const Point2& c : s.geometry.corners()) {
    bool found = false;
    for (int v = 0; v < out.vertex_count(); ++v)
      if (out.vertex(v) == c && out.vertex_info()[static_cast<std::size_t>(v)].kind == VertexKind::Corner) found = true;
    EXPECT_TRUE(found) << c.x << "," << c.y;
  }
  for (int v = 0; v < out.vertex_count(); ++v) {
    const VertexInfo& vi = out.vertex_info()[static_cast<std::size_t>(v)];
    if (vi.kind == VertexKind::Boundary && vi.curve == 1) {
      EXPECT_NEAR(norm(out.vertex(v)), 1.0, 1e-12);
    }
  }
}

TEST(Remesh, FrozenPolygonBoundaryStaysOnPolygon) {
  const EigenProblem p = problem_sector();
  AdaptConfig config;
  config.n_target = 400;
  config.geometry_mode = GeometryMode::FrozenPolygon;
  config.boundary_points = 12;
  const anisoeig::Setup s = initial_setup(p, config);
  ASSERT_EQ(s.geometry.corners().size(), 12u);
  const TriMesh out = remesh(s.mesh, constant(Sym2::diag(3000, 3000)), s.geometry);
  expect_valid(out);
  const auto& poly = s.geometry.corners();
  const double diam = s.geometry.diameter();
  for (int v = 0; v < out.vertex_count(); ++v) {
    if (!out.is_boundary_vertex(v)) continue;
    double best = 1e300;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
      const Point2 e = b - a;
      const double t = std::clamp(dot(out.vertex(v) - a, e) / dot(e, e), 0.0, 1.0);
      best = std::min(best, distance(out.vertex(v), a + e * t));
    }
    EXPECT_LE(best, 1e-12 * diam);
  }
  EXPECT_GT(out.vertex_count(), 100);
}

TEST(Remesh, RejectsGeometryWithoutMatchingCurves) {
  const TriMesh mesh = structured_rectangle(4, 4);
  const Geometry triangle({Curve::segment({0, 0}, {1, 0}), Curve::segment({1, 0}, {0, 1}),
                           Curve::segment({0, 1}, {0, 0})});
  try {
    (void)remesh(mesh, constant(Sym2::identity(100)), triangle);
    FAIL() << "expected a boundary error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Boundary);
  }
}

TEST(Remesh, MetricFieldOverloadMatchesSampler) {
  const TriMesh mesh = structured_rectangle(6, 6);
  MetricField field = identity_metric(mesh);
  for (std::size_t t = 0; t < field.values.size(); ++t) field.values[t] = Sym2::diag(300.0 + t, 200.0);
  field.sigma_h = metric_sigma(mesh, field.values);
  const MetricSampler sampler(mesh, field);
  const TriMesh a = remesh(mesh, field, unit_square_geometry());
  const TriMesh b = remesh(mesh, MetricFunction(std::cref(sampler)), unit_square_geometry());
  EXPECT_EQ(a.vertices(), b.vertices());
  EXPECT_EQ(a.triangles(), b.triangles());
}

TEST(MetricSampler, ReproducesConstantFieldEverywhere) {
  const TriMesh mesh = structured_rectangle(5, 5);
  MetricField field = identity_metric(mesh);
  for (Sym2& m : field.values) m = Sym2{3, 1, 2};
  const MetricSampler s(mesh, field);
  for (const Point2& p : {Point2{0.3, 0.7}, Point2{0, 0}, Point2{1.5, -0.2}}) {
    const Sym2 m = s(p);
    EXPECT_NEAR(m.a11, 3, 1e-14);
    EXPECT_NEAR(m.a12, 1, 1e-14);
    EXPECT_NEAR(m.a22, 2, 1e-14);
  }
}

TEST(Transfer, IdenticalMeshesCopy) {
  const TriMesh mesh = structured_rectangle(7, 5);
  Eigen::MatrixXd u = Eigen::MatrixXd::Random(mesh.vertex_count(), 3);
  const Eigen::MatrixXd v = transfer_solution(mesh, u, mesh);
  EXPECT_LE((u - v).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Transfer, LinearFunctionsAreExact) {
  const TriMesh a = structured_rectangle(7, 5);
  const TriMesh b = remesh(a, constant(Sym2::diag(900, 100)), unit_square_geometry());
  Eigen::MatrixXd u(a.vertex_count(), 1);
  for (int v = 0; v < a.vertex_count(); ++v) u(v, 0) = a.vertex(v).x + 2.0 * a.vertex(v).y;
  const Eigen::MatrixXd w = transfer_solution(a, u, b);
  for (int v = 0; v < b.vertex_count(); ++v) EXPECT_NEAR(w(v, 0), b.vertex(v).x + 2.0 * b.vertex(v).y, 1e-12);
}

TEST(Transfer, QuadraticErrorIsSecondOrder) {
  const TriMesh target = structured_rectangle(37, 41);
  auto f = [](const Point2& p) { return p.x * p.x + p.x * p.y - 2.0 * p.y * p.y; };
  std::vector<double> errors;
  for (int n : {4, 8, 16, 32}) {
    const TriMesh source = structured_rectangle(n, n);
    Eigen::MatrixXd u(source.vertex_count(), 1);
    for (int v = 0; v < source.vertex_count(); ++v) u(v, 0) = f(source.vertex(v));
    const Eigen::MatrixXd w = transfer_solution(source, u, target);
    double err = 0.0;
    for (int v = 0; v < target.vertex_count(); ++v) err = std::max(err, std::abs(w(v, 0) - f(target.vertex(v))));
    errors.push_back(err);
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i - 1] / errors[i];
    EXPECT_GT(ratio, 3.0) << i;
    EXPECT_LT(ratio, 5.5) << i;
  }
}

TEST(Transfer, OutsidePointsAreClampedToElementRange) {
  const TriMesh a = testing::single_triangle({0, 0}, {1, 0}, {0, 1});
  const TriMesh b = testing::single_triangle({-0.5, -0.5}, {2, 0}, {0, 2});
  Eigen::MatrixXd u(3, 1);
  u << 1.0, 2.0, 3.0;
  const Eigen::MatrixXd w = transfer_solution(a, u, b);
  for (int v = 0; v < 3; ++v) {
    EXPECT_GE(w(v, 0), 1.0);
    EXPECT_LE(w(v, 0), 3.0);
  }
}

TEST(AspectRatio, EquilateralIsOneAndStretchScales) {
  const auto ref = reference_element();
  const TriMesh eq = testing::single_triangle(ref[0], ref[1], ref[2]);
  EXPECT_NEAR(aspect_ratio(eq, 0), 1.0, 1e-12);
  const TriMesh stretched = testing::single_triangle({ref[0].x, 7 * ref[0].y}, {ref[1].x, 7 * ref[1].y},
                                                     {ref[2].x, 7 * ref[2].y});
  EXPECT_NEAR(aspect_ratio(stretched, 0), 7.0, 1e-12);
}

TEST(AdaptConfig, ValidationRejectsBadValues) {
  AdaptConfig c;
  EXPECT_NO_THROW(validate(c));
  auto expect_config_error = [](AdaptConfig bad) {
    try {
      validate(bad);
      FAIL() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Config);
    }
  };
  c.k = 0;
  expect_config_error(c);
  c = {};
  c.n_target = 5;
  expect_config_error(c);
  c = {};
  c.alpha = 0;
  expect_config_error(c);
  c = {};
  c.eig_tol = 0;
  expect_config_error(c);
  c = {};
  c.max_outer_iterations = 0;
  expect_config_error(c);
  c = {};
  c.boundary_points = 2;
  expect_config_error(c);
}

TEST(Adapt, TraceCsvLayout) {
  AdaptTrace trace;
  trace.records.push_back({0, 10, 8, {1.5, 2.5}, 1.25, 1.5, 10.0, 0.5});
  std::ostringstream os;
  write_trace_csv(os, trace);
  EXPECT_EQ(os.str(), "iteration,N,lambda_1,lambda_2,C_eq,C_ali,sigma_h,seconds\n0,10,1.5,2.5,1.25,1.5,10,0.5\n");
}

TEST(Adapt, IdentityModeApproachesSquareSpectrumFromAbove) {
  const EigenProblem p = problem_square();
  AdaptConfig c;
  c.metric_mode = MetricMode::Identity;
  c.n_target = 3000;
  c.max_outer_iterations = 3;
  const AdaptResult r = adapt_loop(p, c);
  ASSERT_FALSE(r.trace.records.empty());
  for (const TraceRecord& rec : r.trace.records)
    for (int j = 0; j < c.k; ++j) EXPECT_GE(rec.eigenvalues[static_cast<std::size_t>(j)], p.exact[static_cast<std::size_t>(j)]);
  for (int j = 0; j < c.k; ++j)
    EXPECT_NEAR(r.solution.values[j], p.exact[static_cast<std::size_t>(j)], 0.01 * p.exact[static_cast<std::size_t>(j)]);
  EXPECT_NEAR(r.mesh.triangle_count(), 3000, 0.25 * 3000);
  EXPECT_EQ(r.trace.records.back().elements, r.mesh.triangle_count());
}

TEST(Adapt, RunsAreDeterministic) {
  const EigenProblem p = problem_sector();
  AdaptConfig c;
  c.n_target = 1500;
  c.max_outer_iterations = 3;
  c.seed = 11;
  const AdaptResult a = adapt_loop(p, c);
  const AdaptResult b = adapt_loop(p, c);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    EXPECT_EQ(a.trace.records[i].eigenvalues, b.trace.records[i].eigenvalues);
    EXPECT_EQ(a.trace.records[i].elements, b.trace.records[i].elements);
    EXPECT_EQ(a.trace.records[i].c_eq, b.trace.records[i].c_eq);
    EXPECT_EQ(a.trace.records[i].c_ali, b.trace.records[i].c_ali);
    EXPECT_EQ(a.trace.records[i].sigma_h, b.trace.records[i].sigma_h);
  }
  EXPECT_EQ(a.mesh.vertices(), b.mesh.vertices());
}

TEST(Adapt, LShapeRefinesTowardsReentrantCorner) {
  const EigenProblem p = problem_lshape();
  AdaptConfig c;
  c.n_target = 1e4;
  c.eigenvalue_stall_tol = 0.0;
  const AdaptResult r = adapt_loop(p, c);
  double mean = 0.0, near_corner = 1e300;
  for (int t = 0; t < r.mesh.triangle_count(); ++t) {
    const double d = element_diameter(r.mesh, t);
    mean += d;
    for (const Point2& v : r.mesh.corners_of(t))
      if (v == Point2{0, 0}) near_corner = std::min(near_corner, d);
  }
  mean /= r.mesh.triangle_count();
  EXPECT_LT(near_corner, 0.05 * mean);
}

TEST(Adapt, StageErrorsCarryIterationIndex) {
  const EigenProblem p = problem_square();
  AdaptConfig c;
  anisoeig::Setup s{unit_square_geometry(), structured_rectangle(2, 2)};
  try {
    (void)adapt_loop(p, c, s);
    FAIL() << "expected failure: one interior vertex, k = 4";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
    EXPECT_NE(std::string(e.what()).find("adapt iteration 0"), std::string::npos);
  }
}

}  // namespace
}  // namespace anisoeig
