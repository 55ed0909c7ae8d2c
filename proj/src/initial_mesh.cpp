// SPDX-License-Identifier: Apache-2.0
// Constrained Delaunay initial mesh: ear clipping of the boundary polygon,
// Lawson flips to the constrained Delaunay state, then incremental insertion
// of interior lattice points.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "anisoeig/mesh.hpp"

namespace anisoeig {

namespace {

double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

/// Triangulation with neighbor links; nbr[t][i] is across the edge opposite
/// vertex i, -1 on the constrained outer boundary.
class Cdt {
 public:
  explicit Cdt(std::vector<Point2> pts) : pts_(std::move(pts)) {}

  void triangulate_polygon(int n_boundary) {
    // Ear clipping over boundary vertices 0..n-1 (counterclockwise).
    std::vector<int> prev(static_cast<std::size_t>(n_boundary)), next(static_cast<std::size_t>(n_boundary));
    for (int i = 0; i < n_boundary; ++i) {
      prev[static_cast<std::size_t>(i)] = (i + n_boundary - 1) % n_boundary;
      next[static_cast<std::size_t>(i)] = (i + 1) % n_boundary;
    }
    auto is_ear = [&](int i) {
      const int a = prev[static_cast<std::size_t>(i)], c = next[static_cast<std::size_t>(i)];
      const Point2 pa = pts_[static_cast<std::size_t>(a)], pb = pts_[static_cast<std::size_t>(i)],
                   pc = pts_[static_cast<std::size_t>(c)];
      if (!(orient(pa, pb, pc) > 0.0)) return false;
      for (int j = next[static_cast<std::size_t>(c)]; j != a; j = next[static_cast<std::size_t>(j)]) {
        const Point2 q = pts_[static_cast<std::size_t>(j)];
        if (q == pa || q == pb || q == pc) continue;
        if (orient(pa, pb, q) >= 0.0 && orient(pb, pc, q) >= 0.0 && orient(pc, pa, q) >= 0.0) return false;
      }
      return true;
    };
    int remaining = n_boundary;
    int i = 0;
    int stall = 0;
    while (remaining > 3) {
      if (is_ear(i)) {
        const int a = prev[static_cast<std::size_t>(i)], c = next[static_cast<std::size_t>(i)];
        tris_.push_back({a, i, c});
        next[static_cast<std::size_t>(a)] = c;
        prev[static_cast<std::size_t>(c)] = a;
        --remaining;
        stall = 0;
        i = a;
      } else {
        i = next[static_cast<std::size_t>(i)];
        ANISOEIG_REQUIRE(++stall <= 2 * remaining, ErrorCode::InvalidGeometry,
                         "initial_mesh: boundary polygon could not be triangulated");
      }
    }
    tris_.push_back({prev[static_cast<std::size_t>(i)], i, next[static_cast<std::size_t>(i)]});
    ANISOEIG_REQUIRE(orient(pts_[static_cast<std::size_t>(tris_.back()[0])], pts_[static_cast<std::size_t>(tris_.back()[1])],
                            pts_[static_cast<std::size_t>(tris_.back()[2])]) > 0.0,
                     ErrorCode::InvalidGeometry, "initial_mesh: degenerate boundary polygon");
    build_neighbors();
    std::vector<std::pair<int, int>> stack;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
      for (int e = 0; e < 3; ++e) stack.emplace_back(t, e);
    legalize(stack);
  }

  void insert(int v) {
    const Point2 p = pts_[static_cast<std::size_t>(v)];
    const int t = locate(p);
    // Edge hit: split the two neighbors into four.
    for (int e = 0; e < 3; ++e) {
      const auto& tri = tris_[static_cast<std::size_t>(t)];
      const Point2 a = pts_[static_cast<std::size_t>(tri[static_cast<std::size_t>((e + 1) % 3)])];
      const Point2 b = pts_[static_cast<std::size_t>(tri[static_cast<std::size_t>((e + 2) % 3)])];
      if (orient(a, b, p) == 0.0) {
        split_edge(t, e, v);
        return;
      }
    }
    split_triangle(t, v);
  }

  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return tris_; }

 private:
  void build_neighbors() {
    nbr_.assign(tris_.size(), {-1, -1, -1});
    std::vector<std::pair<std::uint64_t, std::pair<int, int>>> edges;
    edges.reserve(tris_.size() * 3);
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      for (int e = 0; e < 3; ++e) {
        const int a = tris_[static_cast<std::size_t>(t)][static_cast<std::size_t>((e + 1) % 3)];
        const int b = tris_[static_cast<std::size_t>(t)][static_cast<std::size_t>((e + 2) % 3)];
        const auto key = (std::uint64_t(std::min(a, b)) << 32) | std::uint32_t(std::max(a, b));
        edges.push_back({key, {t, e}});
      }
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      if (edges[i].first == edges[i + 1].first) {
        const auto [t0, e0] = edges[i].second;
        const auto [t1, e1] = edges[i + 1].second;
        nbr_[static_cast<std::size_t>(t0)][static_cast<std::size_t>(e0)] = t1;
        nbr_[static_cast<std::size_t>(t1)][static_cast<std::size_t>(e1)] = t0;
        ++i;
      }
    }
  }

  [[nodiscard]] int edge_to(int t, int other) const {
    for (int e = 0; e < 3; ++e)
      if (nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(e)] == other) return e;
    return -1;
  }

  void set_link(int t, int e, int other) {
    nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(e)] = other;
  }

  void relink(int outside, int old_t, int new_t) {
    if (outside < 0) return;
    const int e = edge_to(outside, old_t);
    set_link(outside, e, new_t);
  }

  int locate(const Point2& p) {
    int t = last_;
    const int limit = static_cast<int>(tris_.size()) + 8;
    for (int step = 0; step < limit; ++step) {
      int move = -1;
      for (int k = 0; k < 3; ++k) {
        const int e = (k + step) % 3;
        const auto& tri = tris_[static_cast<std::size_t>(t)];
        const Point2 a = pts_[static_cast<std::size_t>(tri[static_cast<std::size_t>((e + 1) % 3)])];
        const Point2 b = pts_[static_cast<std::size_t>(tri[static_cast<std::size_t>((e + 2) % 3)])];
        if (orient(a, b, p) < 0.0) {
          move = e;
          break;
        }
      }
      if (move < 0) return last_ = t;
      const int n = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(move)];
      if (n < 0) break;
      t = n;
    }
    for (int s = 0; s < static_cast<int>(tris_.size()); ++s) {
      const auto& tri = tris_[static_cast<std::size_t>(s)];
      const Point2 a = pts_[static_cast<std::size_t>(tri[0])], b = pts_[static_cast<std::size_t>(tri[1])],
                   c = pts_[static_cast<std::size_t>(tri[2])];
      if (orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0) return last_ = s;
    }
    fail(ErrorCode::InvalidGeometry, "initial_mesh: interior point outside the boundary polygon");
  }

  void split_triangle(int t, int v) {
    const auto [a, b, c] = tris_[static_cast<std::size_t>(t)];
    const auto [na, nb, nc] = nbr_[static_cast<std::size_t>(t)];
    const int t1 = static_cast<int>(tris_.size()), t2 = t1 + 1;
    tris_[static_cast<std::size_t>(t)] = {v, b, c};
    tris_.push_back({a, v, c});
    tris_.push_back({a, b, v});
    nbr_[static_cast<std::size_t>(t)] = {na, t1, t2};
    nbr_.push_back({t, nb, t2});
    nbr_.push_back({t, t1, nc});
    relink(nb, t, t1);
    relink(nc, t, t2);
    std::vector<std::pair<int, int>> stack{{t, 0}, {t1, 1}, {t2, 2}};
    legalize(stack);
  }

  void split_edge(int t, int e, int v) {
    // t = (x, a, b) with e opposite x; the neighbor s = (y, b, a).
    const auto tri = tris_[static_cast<std::size_t>(t)];
    const int x = tri[static_cast<std::size_t>(e)], a = tri[static_cast<std::size_t>((e + 1) % 3)],
              b = tri[static_cast<std::size_t>((e + 2) % 3)];
    const int s = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(e)];
    const int n_xa = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>((e + 2) % 3)];  // across (x,a)
    const int n_bx = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>((e + 1) % 3)];  // across (b,x)
    const int t1 = static_cast<int>(tris_.size());
    tris_[static_cast<std::size_t>(t)] = {x, a, v};
    tris_.push_back({x, v, b});
    std::vector<std::pair<int, int>> stack{{t, 2}, {t1, 1}};
    if (s < 0) {
      nbr_[static_cast<std::size_t>(t)] = {-1, t1, n_xa};
      nbr_.push_back({-1, n_bx, t});
      relink(n_bx, t, t1);
    } else {
      const int f = edge_to(s, t);
      const auto stri = tris_[static_cast<std::size_t>(s)];
      const int y = stri[static_cast<std::size_t>(f)];
      const int n_ay = nbr_[static_cast<std::size_t>(s)][static_cast<std::size_t>((f + 1) % 3)];  // across (a,y)
      const int n_yb = nbr_[static_cast<std::size_t>(s)][static_cast<std::size_t>((f + 2) % 3)];  // across (y,b)
      const int s1 = t1 + 1;
      tris_[static_cast<std::size_t>(s)] = {y, b, v};
      tris_.push_back({y, v, a});
      nbr_[static_cast<std::size_t>(t)] = {s1, t1, n_xa};
      nbr_.push_back({s, n_bx, t});
      nbr_[static_cast<std::size_t>(s)] = {t1, s1, n_yb};
      nbr_.push_back({t, n_ay, s});
      relink(n_bx, t, t1);
      relink(n_ay, s, s1);
      stack.emplace_back(s, 2);
      stack.emplace_back(s1, 1);
    }
    legalize(stack);
  }

  /// Lawson flips on the (triangle, edge) stack; constrained edges have no neighbor.
  void legalize(std::vector<std::pair<int, int>>& stack) {
    while (!stack.empty()) {
      const auto [t, e] = stack.back();
      stack.pop_back();
      const int s = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(e)];
      if (s < 0) continue;
      const auto tri = tris_[static_cast<std::size_t>(t)];
      const int p = tri[static_cast<std::size_t>(e)], a = tri[static_cast<std::size_t>((e + 1) % 3)],
                b = tri[static_cast<std::size_t>((e + 2) % 3)];
      const int f = edge_to(s, t);
      const int q = tris_[static_cast<std::size_t>(s)][static_cast<std::size_t>(f)];
      const Point2 pp = pts_[static_cast<std::size_t>(p)], pa = pts_[static_cast<std::size_t>(a)],
                   pb = pts_[static_cast<std::size_t>(b)], pq = pts_[static_cast<std::size_t>(q)];
      if (!(incircle(pp, pa, pb, pq) > 0.0)) continue;
      if (!(orient(pp, pa, pq) > 0.0 && orient(pp, pq, pb) > 0.0)) continue;
      // t = (p, a, b), s = (q, b, a)  ->  t = (p, a, q), s = (q, b, p)
      const int n_pa = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>((e + 2) % 3)];
      const int n_bp = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>((e + 1) % 3)];
      const int n_qb = nbr_[static_cast<std::size_t>(s)][static_cast<std::size_t>((f + 2) % 3)];
      const int n_aq = nbr_[static_cast<std::size_t>(s)][static_cast<std::size_t>((f + 1) % 3)];
      tris_[static_cast<std::size_t>(t)] = {p, a, q};
      tris_[static_cast<std::size_t>(s)] = {q, b, p};
      nbr_[static_cast<std::size_t>(t)] = {n_aq, s, n_pa};
      nbr_[static_cast<std::size_t>(s)] = {n_bp, t, n_qb};
      relink(n_aq, s, t);
      relink(n_bp, t, s);
      stack.emplace_back(t, 0);
      stack.emplace_back(t, 2);
      stack.emplace_back(s, 0);
      stack.emplace_back(s, 2);
    }
  }

  std::vector<Point2> pts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<std::array<int, 3>> nbr_;
  int last_ = 0;
};

double segment_distance(const Point2& a, const Point2& b, const Point2& p) {
  const Point2 d = b - a;
  const double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
  return distance(a + t * d, p);
}

}  // namespace

std::vector<int> boundary_allocation(const Geometry& geometry, int n_boundary) {
  const int nc = geometry.curve_count();
  ANISOEIG_REQUIRE(n_boundary >= std::max(3, nc), ErrorCode::InvalidInput,
                   "initial_mesh: boundary point count " + std::to_string(n_boundary) +
                       " is below the corner count " + std::to_string(nc));
  const double perimeter = geometry.perimeter();
  std::vector<double> ideal(static_cast<std::size_t>(nc));
  std::vector<int> n(static_cast<std::size_t>(nc));
  int total = 0;
  for (int i = 0; i < nc; ++i) {
    ideal[static_cast<std::size_t>(i)] = n_boundary * geometry.curve(i).length() / perimeter;
    n[static_cast<std::size_t>(i)] = std::max(1, static_cast<int>(std::floor(ideal[static_cast<std::size_t>(i)])));
    total += n[static_cast<std::size_t>(i)];
  }
  while (total < n_boundary) {
    int best = 0;
    for (int i = 1; i < nc; ++i)
      if (ideal[static_cast<std::size_t>(i)] - n[static_cast<std::size_t>(i)] >
          ideal[static_cast<std::size_t>(best)] - n[static_cast<std::size_t>(best)])
        best = i;
    ++n[static_cast<std::size_t>(best)];
    ++total;
  }
  while (total > n_boundary) {
    int best = -1;
    for (int i = 0; i < nc; ++i) {
      if (n[static_cast<std::size_t>(i)] <= 1) continue;
      if (best < 0 || ideal[static_cast<std::size_t>(i)] - n[static_cast<std::size_t>(i)] <
                          ideal[static_cast<std::size_t>(best)] - n[static_cast<std::size_t>(best)])
        best = i;
    }
    --n[static_cast<std::size_t>(best)];
    --total;
  }
  return n;
}

TriMesh initial_mesh(const Geometry& geometry, int n_boundary, double interior_size) {
  ANISOEIG_REQUIRE(interior_size > 0.0 && std::isfinite(interior_size), ErrorCode::InvalidInput,
                   "initial_mesh: interior size must be positive");
  const auto alloc = boundary_allocation(geometry, n_boundary);

  std::vector<Point2> pts;
  std::vector<VertexInfo> info;
  std::vector<BoundaryEdge> edges;
  for (int c = 0; c < geometry.curve_count(); ++c) {
    const auto& curve = geometry.curve(c);
    const auto params = curve.equal_arclength_params(alloc[static_cast<std::size_t>(c)]);
    const int first = static_cast<int>(pts.size());
    for (std::size_t i = 0; i + 1 < params.size(); ++i) {
      pts.push_back(curve.point(params[i]));
      info.push_back(i == 0 ? VertexInfo{VertexKind::Corner, -1, 0.0}
                            : VertexInfo{VertexKind::Boundary, c, params[i]});
      const int v0 = first + static_cast<int>(i);
      edges.push_back({v0, v0 + 1, c, params[i], params[i + 1]});
    }
  }
  const int nb = static_cast<int>(pts.size());
  edges.back().v1 = 0;

  // Boundary polygon must be simple.
  for (int i = 0; i < nb; ++i) {
    const Point2 a = pts[static_cast<std::size_t>(i)], b = pts[static_cast<std::size_t>((i + 1) % nb)];
    for (int j = i + 2; j < nb; ++j) {
      if (i == 0 && j == nb - 1) continue;
      const Point2 c = pts[static_cast<std::size_t>(j)], d = pts[static_cast<std::size_t>((j + 1) % nb)];
      const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
      if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
        fail(ErrorCode::InvalidGeometry, "initial_mesh: boundary polygon self-intersects");
    }
  }

  // Interior lattice, jittered deterministically, kept clear of the boundary.
  Point2 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double h = interior_size;
  const double dy = h * std::sqrt(3.0) / 2.0;
  std::mt19937_64 rng(12345);
  auto jitter = [&] { return (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 1e-3 * h; };
  std::vector<Point2> interior;
  // Bucket boundary segments for the clearance test.
  const double cell = std::max(h, 1e-12);
  const int gx = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell)) + 1);
  const int gy = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell)) + 1);
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(gx * gy));
  auto bucket_of = [&](double x, double y) {
    const int ix = std::clamp(static_cast<int>((x - lo.x) / cell), 0, gx - 1);
    const int iy = std::clamp(static_cast<int>((y - lo.y) / cell), 0, gy - 1);
    return std::array<int, 2>{ix, iy};
  };
  std::vector<double> seg_len(static_cast<std::size_t>(nb));
  for (int i = 0; i < nb; ++i) {
    const Point2 a = pts[static_cast<std::size_t>(i)], b = pts[static_cast<std::size_t>((i + 1) % nb)];
    seg_len[static_cast<std::size_t>(i)] = distance(a, b);
    const double pad = 0.5 * std::max(h, seg_len[static_cast<std::size_t>(i)]);
    const auto c0 = bucket_of(std::min(a.x, b.x) - pad, std::min(a.y, b.y) - pad);
    const auto c1 = bucket_of(std::max(a.x, b.x) + pad, std::max(a.y, b.y) + pad);
    for (int iy = c0[1]; iy <= c1[1]; ++iy)
      for (int ix = c0[0]; ix <= c1[0]; ++ix) buckets[static_cast<std::size_t>(iy * gx + ix)].push_back(i);
  }
  auto inside_polygon = [&](const Point2& p) {
    bool inside = false;
    for (int i = 0, j = nb - 1; i < nb; j = i++) {
      const Point2 a = pts[static_cast<std::size_t>(i)], b = pts[static_cast<std::size_t>(j)];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) inside = !inside;
      }
    }
    return inside;
  };
  for (int row = 0; lo.y + row * dy < hi.y; ++row) {
    const double y = lo.y + row * dy;
    const double shift = (row % 2) * 0.5 * h;
    for (int col = 0; lo.x + shift + col * h < hi.x; ++col) {
      Point2 p{lo.x + shift + col * h + jitter(), y + jitter()};
      bool ok = true;
      const auto b = bucket_of(p.x, p.y);
      for (int s : buckets[static_cast<std::size_t>(b[1] * gx + b[0])]) {
        const double clearance = 0.5 * std::max(h, 0.5 * seg_len[static_cast<std::size_t>(s)]);
        if (segment_distance(pts[static_cast<std::size_t>(s)], pts[static_cast<std::size_t>((s + 1) % nb)], p) < clearance) {
          ok = false;
          break;
        }
      }
      if (ok && inside_polygon(p)) interior.push_back(p);
    }
  }

  std::vector<Point2> all = pts;
  all.insert(all.end(), interior.begin(), interior.end());
  Cdt cdt(all);
  cdt.triangulate_polygon(nb);
  for (int v = nb; v < static_cast<int>(all.size()); ++v) cdt.insert(v);

  info.resize(all.size(), VertexInfo{});
  std::vector<Triangle> tris(cdt.triangles().begin(), cdt.triangles().end());
  return TriMesh(std::move(all), std::move(tris), std::move(info), std::move(edges));
}

}  // namespace anisoeig
