// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace anisoeig {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (std::uint64_t{lo} << 32) | hi;
}

}  // namespace

TriMesh::TriMesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
                 std::vector<VertexInfo> vertex_info, std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      info_(std::move(vertex_info)),
      boundary_(std::move(boundary_edges)) {
  const int nv = vertex_count();
  ANISOEIG_REQUIRE(static_cast<int>(info_.size()) == nv, ErrorCode::InvalidInput,
                   "TriMesh: vertex info size mismatch");
  ANISOEIG_REQUIRE(!triangles_.empty(), ErrorCode::InvalidInput, "TriMesh: no triangles");

  // Orientation and incidence.
  std::vector<int> count(static_cast<std::size_t>(nv) + 1, 0);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri) {
      ANISOEIG_REQUIRE(v >= 0 && v < nv, ErrorCode::InvalidInput,
                       "TriMesh: vertex index out of range in triangle " + std::to_string(t));
      ++count[static_cast<std::size_t>(v) + 1];
    }
    ANISOEIG_REQUIRE(tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2],
                     ErrorCode::DegenerateElement,
                     "TriMesh: repeated vertex in triangle " + std::to_string(t));
    if (!(area(static_cast<int>(t)) > 0.0)) {
      fail(ErrorCode::DegenerateElement,
           "TriMesh: triangle " + std::to_string(t) + " has nonpositive signed area");
    }
  }
  vt_offsets_.assign(count.begin(), count.end());
  for (int v = 0; v < nv; ++v) vt_offsets_[static_cast<std::size_t>(v) + 1] += vt_offsets_[static_cast<std::size_t>(v)];
  vt_list_.assign(static_cast<std::size_t>(vt_offsets_.back()), 0);
  std::vector<int> fill(vt_offsets_.begin(), vt_offsets_.end() - 1);
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    for (int v : triangles_[t]) vt_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = static_cast<int>(t);

  // Edge manifoldness: directed edge use count.
  std::unordered_map<std::uint64_t, int> uses;
  std::unordered_map<std::uint64_t, std::pair<int, int>> directed;  // single-use direction
  uses.reserve(triangles_.size() * 2);
  for (const auto& tri : triangles_) {
    for (int i = 0; i < 3; ++i) {
      const int a = tri[static_cast<std::size_t>(i)], b = tri[static_cast<std::size_t>((i + 1) % 3)];
      const auto key = edge_key(a, b);
      const int n = ++uses[key];
      ANISOEIG_REQUIRE(n <= 2, ErrorCode::InvalidInput, "TriMesh: edge shared by more than two triangles");
      if (n == 1) directed[key] = {a, b};
      else {
        ANISOEIG_REQUIRE(directed[key].first == b, ErrorCode::InvalidInput,
                         "TriMesh: inconsistent orientation across an edge");
      }
    }
  }
  edge_count_ = static_cast<int>(uses.size());
  std::size_t single = 0;
  for (const auto& [key, n] : uses) single += (n == 1);
  ANISOEIG_REQUIRE(single == boundary_.size(), ErrorCode::InvalidInput,
                   "TriMesh: boundary edge list does not match the single-use edges");
  std::vector<int> out_deg(static_cast<std::size_t>(nv), 0), in_deg(static_cast<std::size_t>(nv), 0);
  for (const auto& e : boundary_) {
    const auto key = edge_key(e.v0, e.v1);
    auto it = uses.find(key);
    ANISOEIG_REQUIRE(it != uses.end() && it->second == 1, ErrorCode::InvalidInput,
                     "TriMesh: listed boundary edge is not a boundary edge of the triangulation");
    ANISOEIG_REQUIRE(directed[key].first == e.v0, ErrorCode::InvalidInput,
                     "TriMesh: boundary edge orientation disagrees with its triangle");
    ANISOEIG_REQUIRE(e.t0 < e.t1, ErrorCode::InvalidInput,
                     "TriMesh: curve parameters must increase along the boundary loop");
    ++out_deg[static_cast<std::size_t>(e.v0)];
    ++in_deg[static_cast<std::size_t>(e.v1)];
  }
  for (int v = 0; v < nv; ++v) {
    const auto& info = info_[static_cast<std::size_t>(v)];
    const bool on_boundary = out_deg[static_cast<std::size_t>(v)] > 0;
    ANISOEIG_REQUIRE(out_deg[static_cast<std::size_t>(v)] == in_deg[static_cast<std::size_t>(v)] &&
                         out_deg[static_cast<std::size_t>(v)] <= 1,
                     ErrorCode::InvalidInput, "TriMesh: boundary loop is not closed at vertex " + std::to_string(v));
    ANISOEIG_REQUIRE(on_boundary == (info.kind != VertexKind::Interior), ErrorCode::InvalidInput,
                     "TriMesh: vertex kind disagrees with boundary topology at vertex " + std::to_string(v));
    ANISOEIG_REQUIRE(vt_offsets_[static_cast<std::size_t>(v) + 1] > vt_offsets_[static_cast<std::size_t>(v)],
                     ErrorCode::InvalidInput, "TriMesh: unreferenced vertex " + std::to_string(v));
  }
}

std::array<Point2, 3> TriMesh::corners_of(int t) const {
  const auto& tri = triangle(t);
  return {vertex(tri[0]), vertex(tri[1]), vertex(tri[2])};
}

double TriMesh::area(int t) const {
  const auto p = corners_of(t);
  return 0.5 * orient(p[0], p[1], p[2]);
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < triangle_count(); ++t) a += area(t);
  return a;
}

Point2 TriMesh::centroid(int t) const {
  const auto p = corners_of(t);
  return (p[0] + p[1] + p[2]) * (1.0 / 3.0);
}

std::span<const int> TriMesh::vertex_triangles(int v) const {
  const auto b = static_cast<std::size_t>(vt_offsets_[static_cast<std::size_t>(v)]);
  const auto e = static_cast<std::size_t>(vt_offsets_[static_cast<std::size_t>(v) + 1]);
  return {vt_list_.data() + b, e - b};
}

double TriMesh::boundary_polygon_area() const {
  double twice = 0.0;
  for (const auto& e : boundary_) twice += cross(vertex(e.v0), vertex(e.v1));
  return 0.5 * twice;
}

double TriMesh::diameter() const {
  Point2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Point2 hi{-lo.x, -lo.y};
  for (const auto& e : boundary_) {
    const Point2 p = vertex(e.v0);
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  // Exact over boundary vertices; the diameter is attained on the boundary.
  double d = 0.0;
  if (boundary_.size() <= 4096) {
    for (std::size_t i = 0; i < boundary_.size(); ++i)
      for (std::size_t j = i + 1; j < boundary_.size(); ++j)
        d = std::max(d, distance(vertex(boundary_[i].v0), vertex(boundary_[j].v0)));
    return d;
  }
  return distance(lo, hi);
}

std::array<Point2, 3> reference_element() {
  const double a = reference_edge_length();
  return {Point2{0.0, 0.0}, Point2{a, 0.0}, Point2{0.5 * a, 0.5 * a * std::sqrt(3.0)}};
}

double reference_edge_length() { return 2.0 / std::pow(3.0, 0.25); }

AffineMap affine_map(const Point2& p0, const Point2& p1, const Point2& p2) {
  const double twice_area = orient(p0, p1, p2);
  ANISOEIG_REQUIRE(twice_area > 0.0, ErrorCode::DegenerateElement,
                   "affine_map: triangle has nonpositive area");
  const auto ref = reference_element();
  const Mat2 e = Mat2::columns(p1 - p0, p2 - p0);
  const Mat2 r = Mat2::columns(ref[1] - ref[0], ref[2] - ref[0]);
  return {e * r.inverse(), p0};
}

AffineMap affine_map(const TriMesh& mesh, int triangle) {
  ANISOEIG_REQUIRE(triangle >= 0 && triangle < mesh.triangle_count(), ErrorCode::InvalidInput,
                   "affine_map: triangle index out of range");
  const auto p = mesh.corners_of(triangle);
  return affine_map(p[0], p[1], p[2]);
}

std::vector<int> vertex_patch(const TriMesh& mesh, int vertex, int ring) {
  ANISOEIG_REQUIRE(vertex >= 0 && vertex < mesh.vertex_count(), ErrorCode::InvalidInput,
                   "vertex_patch: vertex index out of range");
  ANISOEIG_REQUIRE(ring == 1 || ring == 2, ErrorCode::InvalidInput, "vertex_patch: ring must be 1 or 2");
  auto ring1 = [&](int v, std::vector<int>& out) {
    for (int t : mesh.vertex_triangles(v))
      for (int w : mesh.triangle(t)) out.push_back(w);
  };
  std::vector<int> out;
  ring1(vertex, out);
  if (ring == 2) {
    std::vector<int> first = out;
    std::sort(first.begin(), first.end());
    first.erase(std::unique(first.begin(), first.end()), first.end());
    for (int w : first) ring1(w, out);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove(out.begin(), out.end(), vertex), out.end());
  return out;
}

std::array<double, 3> barycentric(const std::array<Point2, 3>& tri, const Point2& p) {
  const double total = orient(tri[0], tri[1], tri[2]);
  const double l0 = orient(p, tri[1], tri[2]) / total;
  const double l1 = orient(tri[0], p, tri[2]) / total;
  return {l0, l1, 1.0 - l0 - l1};
}

namespace {

Point2 closest_on_segment(const Point2& a, const Point2& b, const Point2& p) {
  const Point2 d = b - a;
  const double len2 = dot(d, d);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  return a + t * d;
}

/// Nearest point of a triangle to p (p itself when inside).
Point2 closest_on_triangle(const std::array<Point2, 3>& tri, const Point2& p) {
  const auto l = barycentric(tri, p);
  if (l[0] >= 0.0 && l[1] >= 0.0 && l[2] >= 0.0) return p;
  Point2 best = tri[0];
  double best_d = std::numeric_limits<double>::max();
  for (int i = 0; i < 3; ++i) {
    const Point2 q = closest_on_segment(tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>((i + 1) % 3)], p);
    const double d = distance(q, p);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

}  // namespace

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  Point2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Point2 hi{-lo.x, -lo.y};
  for (const auto& p : mesh.vertices()) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double w = std::max(hi.x - lo.x, 1e-300), h = std::max(hi.y - lo.y, 1e-300);
  const double target_cells = std::max(1.0, static_cast<double>(mesh.triangle_count()) / 2.0);
  cell_ = std::sqrt(w * h / target_cells);
  nx_ = std::clamp(static_cast<int>(std::ceil(w / cell_)), 1, 4096);
  ny_ = std::clamp(static_cast<int>(std::ceil(h / cell_)), 1, 4096);
  cell_ = std::max(w / nx_, h / ny_) * (1.0 + 1e-12);
  lo_ = lo;

  std::vector<int> count(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
  auto for_cells = [&](int t, auto&& fn) {
    const auto p = mesh.corners_of(t);
    Point2 a = p[0], b = p[0];
    for (const auto& q : p) {
      a = {std::min(a.x, q.x), std::min(a.y, q.y)};
      b = {std::max(b.x, q.x), std::max(b.y, q.y)};
    }
    const auto ca = cell_of(a), cb = cell_of(b);
    for (int iy = ca[1]; iy <= cb[1]; ++iy)
      for (int ix = ca[0]; ix <= cb[0]; ++ix) fn(cell_index(ix, iy));
  };
  for (int t = 0; t < mesh.triangle_count(); ++t) for_cells(t, [&](int c) { ++count[static_cast<std::size_t>(c) + 1]; });
  for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
  offsets_ = count;
  items_.assign(static_cast<std::size_t>(count.back()), 0);
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for_cells(t, [&](int c) { items_[static_cast<std::size_t>(fill[static_cast<std::size_t>(c)]++)] = t; });
}

std::array<int, 2> PointLocator::cell_of(const Point2& p) const {
  const int ix = std::clamp(static_cast<int>(std::floor((p.x - lo_.x) / cell_)), 0, nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor((p.y - lo_.y) / cell_)), 0, ny_ - 1);
  return {ix, iy};
}

std::optional<Location> PointLocator::find(const Point2& p, double tol) const {
  const auto c = cell_of(p);
  const int idx = cell_index(c[0], c[1]);
  for (int k = offsets_[static_cast<std::size_t>(idx)]; k < offsets_[static_cast<std::size_t>(idx) + 1]; ++k) {
    const int t = items_[static_cast<std::size_t>(k)];
    const auto l = barycentric(mesh_->corners_of(t), p);
    if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) return Location{t, l};
  }
  return std::nullopt;
}

Location PointLocator::nearest(const Point2& p) const {
  if (auto hit = find(p, 0.0)) return *hit;
  const auto c = cell_of(p);
  // Distance from p to the grid box bounds the search radius.
  const Point2 hi{lo_.x + nx_ * cell_, lo_.y + ny_ * cell_};
  const double outside = std::hypot(std::max({lo_.x - p.x, 0.0, p.x - hi.x}),
                                    std::max({lo_.y - p.y, 0.0, p.y - hi.y}));
  int best = -1;
  double best_d = std::numeric_limits<double>::max();
  Point2 best_q;
  const int max_ring = std::max(nx_, ny_);
  for (int r = 0; r <= max_ring; ++r) {
    for (int iy = c[1] - r; iy <= c[1] + r; ++iy) {
      if (iy < 0 || iy >= ny_) continue;
      for (int ix = c[0] - r; ix <= c[0] + r; ++ix) {
        if (ix < 0 || ix >= nx_) continue;
        if (std::max(std::abs(ix - c[0]), std::abs(iy - c[1])) != r) continue;
        const int idx = cell_index(ix, iy);
        for (int k = offsets_[static_cast<std::size_t>(idx)]; k < offsets_[static_cast<std::size_t>(idx) + 1]; ++k) {
          const int t = items_[static_cast<std::size_t>(k)];
          const auto tri = mesh_->corners_of(t);
          const Point2 q = closest_on_triangle(tri, p);
          const double d = distance(p, q);
          if (d < best_d || (d == best_d && t < best)) {
            best_d = d;
            best = t;
            best_q = q;
          }
        }
      }
    }
    // Every cell beyond ring r is at least (r * cell - outside) away.
    if (best >= 0 && best_d <= r * cell_ - outside) break;
  }
  auto l = barycentric(mesh_->corners_of(best), best_q);
  for (double& x : l) x = std::clamp(x, 0.0, 1.0);
  const double s = l[0] + l[1] + l[2];
  for (double& x : l) x /= s;
  return {best, l};
}

Location locate(const TriMesh& mesh, const Point2& p) {
  PointLocator loc(mesh);
  if (auto hit = loc.find(p)) return *hit;
  const Location near = loc.nearest(p);
  std::ostringstream os;
  os << "locate: point (" << p.x << ", " << p.y << ") is outside the mesh; nearest triangle "
     << near.triangle;
  throw NotFoundError(os.str(), near.triangle);
}

std::vector<Point2> boundary_loop(const TriMesh& mesh) {
  std::map<int, const BoundaryEdge*> next;
  for (const auto& e : mesh.boundary_edges()) next[e.v0] = &e;
  int start = -1;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (mesh.vertex_info()[static_cast<std::size_t>(v)].kind == VertexKind::Corner) {
      start = v;
      break;
    }
  }
  if (start < 0) start = next.begin()->first;
  std::vector<Point2> loop;
  int v = start;
  do {
    loop.push_back(mesh.vertex(v));
    v = next.at(v)->v1;
  } while (v != start && loop.size() <= mesh.boundary_edges().size());
  return loop;
}

namespace {

const char* kind_name(VertexKind k) {
  switch (k) {
    case VertexKind::Interior: return "interior";
    case VertexKind::Boundary: return "boundary";
    case VertexKind::Corner: return "corner";
  }
  return "?";
}

}  // namespace

void write_native(std::ostream& os, const TriMesh& mesh) {
  const auto old_precision = os.precision(17);
  os << "tri-mesh 2\n" << mesh.vertex_count() << '\n';
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto& p = mesh.vertex(v);
    const auto& info = mesh.vertex_info()[static_cast<std::size_t>(v)];
    os << p.x << ' ' << p.y << ' ' << kind_name(info.kind);
    if (info.kind == VertexKind::Boundary) os << ' ' << info.curve << ' ' << info.param;
    os << '\n';
  }
  os << mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << mesh.boundary_edges().size() << '\n';
  for (const auto& e : mesh.boundary_edges())
    os << e.v0 << ' ' << e.v1 << ' ' << e.curve << ' ' << e.t0 << ' ' << e.t1 << '\n';
  os.precision(old_precision);
}

TriMesh read_native(std::istream& is) {
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::Parse, "read_native: " + what + " near byte " + std::to_string(static_cast<long long>(is.tellg())));
  };
  std::string magic;
  int dim = 0;
  if (!(is >> magic >> dim) || magic != "tri-mesh" || dim != 2) bad("bad header");
  long nv = 0;
  if (!(is >> nv) || nv < 3) bad("bad vertex count");
  std::vector<Point2> pts(static_cast<std::size_t>(nv));
  std::vector<VertexInfo> info(static_cast<std::size_t>(nv));
  for (auto i = 0L; i < nv; ++i) {
    std::string kind;
    auto& p = pts[static_cast<std::size_t>(i)];
    if (!(is >> p.x >> p.y >> kind)) bad("truncated vertex list");
    auto& vi = info[static_cast<std::size_t>(i)];
    if (kind == "interior") vi.kind = VertexKind::Interior;
    else if (kind == "corner") vi.kind = VertexKind::Corner;
    else if (kind == "boundary") {
      vi.kind = VertexKind::Boundary;
      if (!(is >> vi.curve >> vi.param)) bad("truncated boundary vertex");
    } else bad("unknown vertex kind '" + kind + "'");
  }
  long nt = 0;
  if (!(is >> nt) || nt < 1) bad("bad triangle count");
  std::vector<Triangle> tris(static_cast<std::size_t>(nt));
  for (auto& t : tris)
    if (!(is >> t[0] >> t[1] >> t[2])) bad("truncated triangle list");
  long nb = 0;
  if (!(is >> nb) || nb < 3) bad("bad boundary edge count");
  std::vector<BoundaryEdge> edges(static_cast<std::size_t>(nb));
  for (auto& e : edges)
    if (!(is >> e.v0 >> e.v1 >> e.curve >> e.t0 >> e.t1)) bad("truncated boundary edge list");
  return TriMesh(std::move(pts), std::move(tris), std::move(info), std::move(edges));
}

void write_vtk(std::ostream& os, const TriMesh& mesh, std::span<const PointField> fields) {
  const auto old_precision = os.precision(17);
  os << "# vtk DataFile Version 3.0\nanisoeig mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& p : mesh.vertices()) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.triangle_count() << '\n';
  for (int t = 0; t < mesh.triangle_count(); ++t) os << "5\n";
  if (!fields.empty()) {
    os << "POINT_DATA " << mesh.vertex_count() << '\n';
    for (const auto& f : fields) {
      ANISOEIG_REQUIRE(static_cast<int>(f.values.size()) == mesh.vertex_count(), ErrorCode::InvalidInput,
                       "write_vtk: field '" + f.name + "' has the wrong length");
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) os << v << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace anisoeig
