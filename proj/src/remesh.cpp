// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "anisoeig/adapt.hpp"
#include "anisoeig/error.hpp"

namespace anisoeig {

namespace {

constexpr double kSplitLength = 1.4142135623730951;
constexpr double kCollapseLength = 0.7071067811865476;
constexpr double kMinSine = 1e-10;
constexpr double kQualityFloor = 1.5;
constexpr double kCountTolerance = 0.1;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (std::uint64_t{lo} << 32) | hi;
}

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

class Remesher {
 public:
  Remesher(const TriMesh& mesh, const MetricFunction& metric, const Geometry& geometry, const RemeshOptions& options)
      : metric_(metric), geometry_(geometry), options_(options) {
    const auto ref = reference_element();
    ref_inv_ = Mat2::columns(ref[1] - ref[0], ref[2] - ref[0]).inverse();
    inv_ref_edge_ = 1.0 / reference_edge_length();
    pts_ = mesh.vertices();
    info_ = mesh.vertex_info();
    alive_v_.assign(pts_.size(), 1);
    vt_.resize(pts_.size());
    for (const Point2& p : pts_) vm_.push_back(metric_(p));
    for (const Triangle& t : mesh.triangles()) add_triangle(t);
    for (const BoundaryEdge& e : mesh.boundary_edges()) bedges_[edge_key(e.v0, e.v1)] = e;
  }

  void run(RemeshStats& stats) {
    passes(stats);
    // The length band leaves the mean edge short of unit length, so the
    // element count can overshoot the metric volume; rescale and repeat.
    for (int round = 0; round < 3; ++round) {
      const auto [count, volume] = count_and_volume();
      const double ratio = count / volume;
      if (std::abs(ratio - 1.0) <= kCountTolerance) break;
      const double s = 1.0 / ratio;
      scale_ *= s;
      for (Sym2& m : vm_) m *= s;
      passes(stats);
    }
    for (int i = 0; i < 2; ++i) {
      stats.flips += flip_sweeps(2);
      stats.moves += smooth_pass();
    }
  }

  void passes(RemeshStats& stats) {
    for (int pass = 0; pass < options_.max_passes; ++pass) {
      const int s = split_pass();
      const int c = collapse_pass();
      stats.splits += s;
      stats.collapses += c;
      stats.flips += flip_sweeps(3);
      stats.moves += smooth_pass();
      ++stats.passes;
      if (s + c == 0) break;
    }
  }

  /// Element count and unscaled metric volume sum |K| det(M)^{1/2}.
  std::pair<double, double> count_and_volume() const {
    double count = 0.0, volume = 0.0;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_t_[t]) continue;
      const Triangle& tri = tris_[t];
      const Sym2 m = (vm_[idx(tri[0])] + vm_[idx(tri[1])] + vm_[idx(tri[2])]) * (1.0 / 3.0);
      const double area = 0.5 * orient(pts_[idx(tri[0])], pts_[idx(tri[1])], pts_[idx(tri[2])]);
      volume += area * std::sqrt(std::max(m.det(), 0.0));
      count += 1.0;
    }
    return {count, volume / scale_};
  }

  Sym2 sample(const Point2& p) const { return metric_(p) * scale_; }

  TriMesh build() const {
    std::vector<int> renumber(pts_.size(), -1);
    std::vector<Point2> pts;
    std::vector<VertexInfo> info;
    for (std::size_t v = 0; v < pts_.size(); ++v) {
      if (!alive_v_[v] || vt_[v].empty()) continue;
      renumber[v] = static_cast<int>(pts.size());
      pts.push_back(pts_[v]);
      info.push_back(info_[v]);
    }
    std::vector<Triangle> tris;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_t_[t]) continue;
      const Triangle& tri = tris_[t];
      tris.push_back({renumber[idx(tri[0])], renumber[idx(tri[1])], renumber[idx(tri[2])]});
    }
    std::vector<BoundaryEdge> edges;
    for (const auto& [key, e] : bedges_) {
      BoundaryEdge r = e;
      r.v0 = renumber[idx(e.v0)];
      r.v1 = renumber[idx(e.v1)];
      edges.push_back(r);
    }
    std::sort(edges.begin(), edges.end(), [](const BoundaryEdge& a, const BoundaryEdge& b) {
      return a.curve != b.curve ? a.curve < b.curve : a.t0 < b.t0;
    });
    try {
      return TriMesh(std::move(pts), std::move(tris), std::move(info), std::move(edges));
    } catch (const Error& e) {
      fail(ErrorCode::Remesh, std::string("remesh produced an invalid mesh: ") + e.what());
    }
  }

 private:
  // ---- topology helpers ----
  int add_vertex(const Point2& p, const VertexInfo& info) {
    pts_.push_back(p);
    info_.push_back(info);
    alive_v_.push_back(1);
    vt_.emplace_back();
    vm_.push_back(sample(p));
    return static_cast<int>(pts_.size()) - 1;
  }

  int add_triangle(const Triangle& t) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back(t);
    alive_t_.push_back(1);
    for (int v : t) vt_[idx(v)].push_back(id);
    return id;
  }

  void kill_triangle(int t) {
    alive_t_[idx(t)] = 0;
    for (int v : tris_[idx(t)]) {
      auto& list = vt_[idx(v)];
      list.erase(std::find(list.begin(), list.end(), t));
    }
  }

  std::vector<int> edge_triangles(int a, int b) const {
    std::vector<int> out;
    for (int t : vt_[idx(a)]) {
      const Triangle& tri = tris_[idx(t)];
      if (tri[0] == b || tri[1] == b || tri[2] == b) out.push_back(t);
    }
    return out;
  }

  std::vector<int> link(int v) const {
    std::vector<int> out;
    for (int t : vt_[idx(v)])
      for (int w : tris_[idx(t)])
        if (w != v) out.push_back(w);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  const BoundaryEdge* boundary_edge(int a, int b) const {
    const auto it = bedges_.find(edge_key(a, b));
    return it == bedges_.end() ? nullptr : &it->second;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::uint64_t> keys;
    keys.reserve(tris_.size() * 3);
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_t_[t]) continue;
      const Triangle& tri = tris_[t];
      for (int i = 0; i < 3; ++i) keys.push_back(edge_key(tri[idx(i)], tri[idx((i + 1) % 3)]));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<std::pair<int, int>> out;
    out.reserve(keys.size());
    for (auto k : keys) out.emplace_back(static_cast<int>(k >> 32), static_cast<int>(k & 0xffffffffu));
    return out;
  }

  // ---- geometry helpers ----
  double length(int a, int b) const {
    return metric_edge_length(vm_[idx(a)], vm_[idx(b)], pts_[idx(b)] - pts_[idx(a)]) * inv_ref_edge_;
  }

  static bool valid(const Point2& a, const Point2& b, const Point2& c) {
    const Point2 e1 = b - a, e2 = c - a, e3 = c - b;
    const double scale = std::max({dot(e1, e1), dot(e2, e2), dot(e3, e3)});
    return orient(a, b, c) > kMinSine * scale;
  }

  double alignment(const Point2& a, const Point2& b, const Point2& c, const Sym2& m) const {
    const Mat2 j = Mat2::columns(b - a, c - a) * ref_inv_;
    return alignment_ratio(j, m);
  }

  double alignment(const Triangle& t) const {
    const Sym2 m = (vm_[idx(t[0])] + vm_[idx(t[1])] + vm_[idx(t[2])]) * (1.0 / 3.0);
    return alignment(pts_[idx(t[0])], pts_[idx(t[1])], pts_[idx(t[2])], m);
  }

  // ---- split ----
  int split_pass() {
    std::vector<std::tuple<double, int, int>> todo;
    for (const auto& [a, b] : edges()) {
      const double l = length(a, b);
      if (l > kSplitLength) todo.emplace_back(l, a, b);
    }
    std::sort(todo.begin(), todo.end(), [](const auto& x, const auto& y) {
      if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
      return edge_key(std::get<1>(x), std::get<2>(x)) < edge_key(std::get<1>(y), std::get<2>(y));
    });
    // one split per triangle and pass keeps refinement from quantizing the
    // element count on uniform meshes
    pass_start_ = static_cast<int>(tris_.size());
    int count = 0;
    for (const auto& [l, a, b] : todo)
      if (split(a, b)) ++count;
    return count;
  }

  // Fraction from a to b at which the metric length is halved, with the
  // length density varying linearly between the endpoint values.
  double metric_midpoint(int a, int b) const {
    const Point2 e = pts_[idx(b)] - pts_[idx(a)];
    const double la = metric_edge_length(vm_[idx(a)], e);
    const double lb = metric_edge_length(vm_[idx(b)], e);
    if (!(la > 0.0) || !(lb > 0.0) || std::abs(lb - la) < 1e-12 * (la + lb)) return 0.5;
    const double t = (std::sqrt(0.5 * (la * la + lb * lb)) - la) / (lb - la);
    return std::clamp(t, 0.25, 0.75);
  }

  bool split(int a, int b) {
    const std::vector<int> shared = edge_triangles(a, b);
    if (shared.empty()) return false;
    for (int t : shared)
      if (t >= pass_start_) return false;
    const double s = metric_midpoint(a, b);
    Point2 p = pts_[idx(a)] + (pts_[idx(b)] - pts_[idx(a)]) * s;
    VertexInfo info;
    const BoundaryEdge* be = boundary_edge(a, b);
    BoundaryEdge edge{};
    if (be != nullptr) {
      edge = *be;
      const double s0 = edge.v0 == a ? s : 1.0 - s;
      const double tm = edge.t0 + s0 * (edge.t1 - edge.t0);
      p = geometry_.curve(edge.curve).point(tm);
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        fail(ErrorCode::Boundary, "remesh: projection onto curve " + std::to_string(edge.curve) + " failed");
      info = {VertexKind::Boundary, edge.curve, tm};
    }
    // new triangles (x, m, c), (m, y, c) for each (x, y, c) containing the edge
    std::vector<std::array<int, 3>> parts;
    for (int t : shared) {
      const Triangle& tri = tris_[idx(t)];
      int i = 0;
      while (!((tri[idx(i)] == a && tri[idx((i + 1) % 3)] == b) || (tri[idx(i)] == b && tri[idx((i + 1) % 3)] == a))) ++i;
      const int x = tri[idx(i)], y = tri[idx((i + 1) % 3)], c = tri[idx((i + 2) % 3)];
      if (!valid(pts_[idx(x)], p, pts_[idx(c)]) || !valid(p, pts_[idx(y)], pts_[idx(c)])) return false;
      parts.push_back({x, y, c});
    }
    const int m = add_vertex(p, info);
    for (int t : shared) kill_triangle(t);
    for (const auto& [x, y, c] : parts) {
      add_triangle({x, m, c});
      add_triangle({m, y, c});
    }
    if (be != nullptr) {
      bedges_.erase(edge_key(a, b));
      bedges_[edge_key(edge.v0, m)] = {edge.v0, m, edge.curve, edge.t0, info.param};
      bedges_[edge_key(m, edge.v1)] = {m, edge.v1, edge.curve, info.param, edge.t1};
    }
    return true;
  }

  // ---- collapse ----
  int collapse_pass() {
    std::vector<std::tuple<double, int, int>> todo;
    for (const auto& [a, b] : edges()) {
      const double l = length(a, b);
      if (l < kCollapseLength) todo.emplace_back(l, a, b);
    }
    std::sort(todo.begin(), todo.end(), [](const auto& x, const auto& y) {
      if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) < std::get<0>(y);
      return edge_key(std::get<1>(x), std::get<2>(x)) < edge_key(std::get<1>(y), std::get<2>(y));
    });
    int count = 0;
    for (const auto& [l0, a, b] : todo) {
      if (!alive_v_[idx(a)] || !alive_v_[idx(b)]) continue;
      if (edge_triangles(a, b).empty()) continue;
      if (length(a, b) >= kCollapseLength) continue;
      const bool a_first = info_[idx(a)].kind == VertexKind::Interior || info_[idx(b)].kind != VertexKind::Interior;
      if (a_first ? (collapse(a, b) || collapse(b, a)) : (collapse(b, a) || collapse(a, b))) ++count;
    }
    return count;
  }

  /// Removes vertex a by merging it into b.
  bool collapse(int a, int b) {
    const VertexInfo& ia = info_[idx(a)];
    if (ia.kind == VertexKind::Corner) return false;
    const BoundaryEdge* be = boundary_edge(a, b);
    if (ia.kind == VertexKind::Boundary) {
      if (be == nullptr) return false;
      const VertexInfo& ib = info_[idx(b)];
      if (ib.kind == VertexKind::Boundary && ib.curve != ia.curve) return false;
    }
    const std::vector<int> shared = edge_triangles(a, b);
    if (shared.size() != (be != nullptr ? 1u : 2u)) return false;

    // link condition
    const std::vector<int> la = link(a), lb = link(b);
    std::vector<int> common;
    std::set_intersection(la.begin(), la.end(), lb.begin(), lb.end(), std::back_inserter(common));
    std::vector<int> opposite;
    for (int t : shared)
      for (int w : tris_[idx(t)])
        if (w != a && w != b) opposite.push_back(w);
    std::sort(opposite.begin(), opposite.end());
    if (common != opposite) return false;
    // the boundary loop must keep at least three vertices
    if (be != nullptr && la.size() <= 2 && lb.size() <= 2) return false;

    const Point2 pb = pts_[idx(b)];
    double old_quality = 0.0, new_quality = 0.0;
    std::vector<Triangle> moved;
    for (int t : vt_[idx(a)]) {
      old_quality = std::max(old_quality, alignment(tris_[idx(t)]));
      if (std::find(shared.begin(), shared.end(), t) != shared.end()) continue;
      Triangle tri = tris_[idx(t)];
      for (int& v : tri)
        if (v == a) v = b;
      if (!valid(pts_[idx(tri[0])], pts_[idx(tri[1])], pts_[idx(tri[2])])) return false;
      new_quality = std::max(new_quality, alignment(tri));
      moved.push_back(tri);
    }
    (void)pb;
    if (new_quality > std::max(old_quality, 4.0)) return false;
    for (int x : la)
      if (x != b && length(b, x) > kSplitLength) return false;

    // boundary edges p -> a -> q become p -> q
    BoundaryEdge merged{};
    if (be != nullptr) {
      const BoundaryEdge* in = nullptr;
      const BoundaryEdge* out = nullptr;
      for (int x : la) {
        const BoundaryEdge* e = boundary_edge(a, x);
        if (e == nullptr) continue;
        if (e->v1 == a) in = e;
        if (e->v0 == a) out = e;
      }
      if (in == nullptr || out == nullptr || in->curve != out->curve) return false;
      merged = {in->v0, out->v1, in->curve, in->t0, out->t1};
      const int p = in->v0, q = out->v1;
      bedges_.erase(edge_key(p, a));
      bedges_.erase(edge_key(a, q));
      bedges_[edge_key(merged.v0, merged.v1)] = merged;
    }
    const std::vector<int> star = vt_[idx(a)];
    for (int t : star) kill_triangle(t);
    for (const Triangle& tri : moved) add_triangle(tri);
    alive_v_[idx(a)] = 0;
    return true;
  }

  // ---- flips ----
  int flip_sweeps(int max_sweeps) {
    int total = 0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      int flips = 0;
      for (const auto& [a, b] : edges())
        if (flip(a, b)) ++flips;
      total += flips;
      if (flips == 0) break;
    }
    return total;
  }

  bool flip(int a, int b) {
    if (boundary_edge(a, b) != nullptr) return false;
    const std::vector<int> shared = edge_triangles(a, b);
    if (shared.size() != 2) return false;
    // orient so that t1 = (a, b, c) and t2 = (b, a, d)
    auto third = [&](int t, int x, int y) {
      const Triangle& tri = tris_[idx(t)];
      for (int i = 0; i < 3; ++i)
        if (tri[idx(i)] == x && tri[idx((i + 1) % 3)] == y) return tri[idx((i + 2) % 3)];
      return -1;
    };
    int t1 = shared[0], t2 = shared[1];
    int c = third(t1, a, b);
    if (c < 0) {
      std::swap(t1, t2);
      c = third(t1, a, b);
    }
    const int d = third(t2, b, a);
    if (c < 0 || d < 0 || c == d) return false;
    if (!edge_triangles(c, d).empty()) return false;
    const Triangle n1{a, d, c}, n2{d, b, c};
    if (!valid(pts_[idx(a)], pts_[idx(d)], pts_[idx(c)]) || !valid(pts_[idx(d)], pts_[idx(b)], pts_[idx(c)]))
      return false;
    const double before = std::max(alignment(tris_[idx(t1)]), alignment(tris_[idx(t2)]));
    const double after = std::max(alignment(n1), alignment(n2));
    if (!(after < before * (1.0 - 1e-6))) return false;
    kill_triangle(t1);
    kill_triangle(t2);
    add_triangle(n1);
    add_triangle(n2);
    return true;
  }

  // ---- smoothing ----
  int smooth_pass() {
    int moves = 0;
    for (std::size_t v = 0; v < pts_.size(); ++v) {
      if (!alive_v_[v] || info_[v].kind != VertexKind::Interior || vt_[v].empty()) continue;
      if (smooth(static_cast<int>(v))) ++moves;
    }
    return moves;
  }

  bool smooth(int v) {
    const std::vector<int> nbrs = link(v);
    Point2 target{0, 0};
    double wsum = 0.0;
    for (int w : nbrs) {
      const double l = length(v, w);
      target = target + pts_[idx(w)] * l;
      wsum += l;
    }
    if (!(wsum > 0.0)) return false;
    target = target * (1.0 / wsum);
    const Point2 old_p = pts_[idx(v)];
    const Point2 new_p = old_p + (target - old_p) * options_.smoothing;
    if (distance(new_p, old_p) == 0.0) return false;

    double old_quality = 0.0;
    for (int t : vt_[idx(v)]) old_quality = std::max(old_quality, alignment(tris_[idx(t)]));
    const Sym2 old_m = vm_[idx(v)];
    pts_[idx(v)] = new_p;
    vm_[idx(v)] = sample(new_p);
    double new_quality = 0.0;
    bool ok = true;
    for (int t : vt_[idx(v)]) {
      const Triangle& tri = tris_[idx(t)];
      if (!valid(pts_[idx(tri[0])], pts_[idx(tri[1])], pts_[idx(tri[2])])) {
        ok = false;
        break;
      }
      new_quality = std::max(new_quality, alignment(tri));
    }
    if (ok && new_quality > std::max(old_quality, kQualityFloor)) ok = false;
    if (!ok) {
      pts_[idx(v)] = old_p;
      vm_[idx(v)] = old_m;
    }
    return ok;
  }

  const MetricFunction& metric_;
  const Geometry& geometry_;
  RemeshOptions options_;
  Mat2 ref_inv_;
  double inv_ref_edge_ = 1.0;
  double scale_ = 1.0;
  int pass_start_ = 0;

  std::vector<Point2> pts_;
  std::vector<VertexInfo> info_;
  std::vector<Sym2> vm_;
  std::vector<char> alive_v_;
  std::vector<Triangle> tris_;
  std::vector<char> alive_t_;
  std::vector<std::vector<int>> vt_;
  std::unordered_map<std::uint64_t, BoundaryEdge> bedges_;
};

}  // namespace

MetricSampler::MetricSampler(const TriMesh& background, const MetricField& metric)
    : mesh_(std::make_shared<const TriMesh>(background)) {
  ANISOEIG_REQUIRE(static_cast<int>(metric.values.size()) == background.triangle_count(), ErrorCode::InvalidInput,
                   "MetricSampler: metric does not match the mesh");
  locator_ = std::make_shared<const PointLocator>(*mesh_);
  vertex_.reserve(idx(mesh_->vertex_count()));
  std::vector<Spd2> incident;
  for (int v = 0; v < mesh_->vertex_count(); ++v) {
    incident.clear();
    for (int t : mesh_->vertex_triangles(v)) incident.emplace_back(metric.values[idx(t)]);
    vertex_.push_back(sequential_intersection(incident));
  }
  // Intersection enlarges the tensors; restore the metric volume of the field.
  double volume = 0.0;
  for (int t = 0; t < mesh_->triangle_count(); ++t) {
    const Triangle& tri = mesh_->triangle(t);
    const Sym2 m = (vertex_[idx(tri[0])] + vertex_[idx(tri[1])] + vertex_[idx(tri[2])]) * (1.0 / 3.0);
    volume += mesh_->area(t) * std::sqrt(m.det());
  }
  const double sigma = metric_sigma(*mesh_, metric.values);
  if (volume > 0.0 && sigma > 0.0)
    for (Sym2& m : vertex_) m *= sigma / volume;
}

Sym2 MetricSampler::operator()(const Point2& p) const {
  const auto found = locator_->find(p);
  const Location loc = found ? *found : locator_->nearest(p);
  const Triangle& tri = mesh_->triangle(loc.triangle);
  Sym2 m{};
  for (int i = 0; i < 3; ++i) m += std::clamp(loc.bary[idx(i)], 0.0, 1.0) * vertex_[idx(tri[idx(i)])];
  const double s = std::clamp(loc.bary[0], 0.0, 1.0) + std::clamp(loc.bary[1], 0.0, 1.0) + std::clamp(loc.bary[2], 0.0, 1.0);
  return m * (1.0 / s);
}

TriMesh remesh(const TriMesh& mesh, const MetricFunction& metric, const Geometry& geometry, const RemeshOptions& options,
               RemeshStats* stats) {
  ANISOEIG_REQUIRE(options.max_passes >= 1, ErrorCode::InvalidInput, "remesh: max_passes must be positive");
  ANISOEIG_REQUIRE(options.smoothing >= 0.0 && options.smoothing <= 1.0, ErrorCode::InvalidInput,
                   "remesh: smoothing factor must lie in [0, 1]");
  for (const auto& e : mesh.boundary_edges())
    ANISOEIG_REQUIRE(e.curve >= 0 && e.curve < geometry.curve_count(), ErrorCode::Boundary,
                     "remesh: boundary edge refers to unknown curve " + std::to_string(e.curve));
  Remesher r(mesh, metric, geometry, options);
  RemeshStats local;
  r.run(local);
  if (stats != nullptr) *stats = local;
  return r.build();
}

TriMesh remesh(const TriMesh& mesh, const MetricField& metric, const Geometry& geometry, const RemeshOptions& options,
               RemeshStats* stats) {
  const MetricSampler sampler(mesh, metric);
  return remesh(mesh, MetricFunction(std::cref(sampler)), geometry, options, stats);
}

MetricField sample_metric(const TriMesh& mesh, const MetricFunction& metric) {
  MetricField out;
  out.mode = MetricMode::Anisotropic;
  out.values.reserve(idx(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t) out.values.push_back(metric(mesh.centroid(t)));
  out.sigma_h = metric_sigma(mesh, out.values);
  return out;
}

Eigen::MatrixXd transfer_solution(const TriMesh& old_mesh, const Eigen::MatrixXd& values, const TriMesh& new_mesh) {
  ANISOEIG_REQUIRE(values.rows() == old_mesh.vertex_count(), ErrorCode::InvalidInput,
                   "transfer_solution: one row per old vertex required");
  const PointLocator locator(old_mesh);
  Eigen::MatrixXd out(new_mesh.vertex_count(), values.cols());
  for (int v = 0; v < new_mesh.vertex_count(); ++v) {
    const Point2& p = new_mesh.vertex(v);
    const auto found = locator.find(p);
    const Location loc = found ? *found : locator.nearest(p);
    const Triangle& tri = old_mesh.triangle(loc.triangle);
    for (int j = 0; j < values.cols(); ++j) {
      double x = 0.0;
      double lo = values(tri[0], j), hi = lo;
      for (int i = 0; i < 3; ++i) {
        const double f = values(tri[idx(i)], j);
        x += loc.bary[idx(i)] * f;
        lo = std::min(lo, f);
        hi = std::max(hi, f);
      }
      out(v, j) = found ? x : std::clamp(x, lo, hi);
    }
  }
  return out;
}

double aspect_ratio(const TriMesh& mesh, int t) {
  const Mat2 j = affine_map(mesh, t).jacobian;
  const double smax = norm2(j);
  const double smin = std::abs(j.det()) / smax;
  return smax / smin;
}

}  // namespace anisoeig
