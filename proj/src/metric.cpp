// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/metric.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "anisoeig/error.hpp"

namespace anisoeig {

namespace {

std::array<double, 11> deciles(std::vector<double> v) {
  std::array<double, 11> out{};
  if (v.empty()) return out;
  std::sort(v.begin(), v.end());
  for (int i = 0; i <= 10; ++i) {
    const auto idx = static_cast<std::size_t>(std::lround(0.1 * i * static_cast<double>(v.size() - 1)));
    out[static_cast<std::size_t>(i)] = v[idx];
  }
  return out;
}

}  // namespace

const char* to_string(MetricMode mode) noexcept {
  switch (mode) {
    case MetricMode::Anisotropic: return "anisotropic";
    case MetricMode::Isotropic: return "isotropic";
    case MetricMode::Identity: return "identity";
  }
  return "unknown";
}

MetricMode parse_metric_mode(const std::string& text) {
  if (text == "anisotropic") return MetricMode::Anisotropic;
  if (text == "isotropic") return MetricMode::Isotropic;
  if (text == "identity") return MetricMode::Identity;
  fail(ErrorCode::Config, "unknown metric mode '" + text + "'");
}

double metric_sigma(const TriMesh& mesh, const std::vector<Sym2>& values) {
  ANISOEIG_REQUIRE(static_cast<int>(values.size()) == mesh.triangle_count(), ErrorCode::InvalidInput,
                   "metric_sigma: one tensor per element required");
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    s += mesh.area(t) * std::sqrt(std::max(0.0, values[static_cast<std::size_t>(t)].det()));
  return s;
}

Sym2 element_average_hessian(const TriMesh& mesh, const HessianField& h, int t) {
  const auto& tri = mesh.triangle(t);
  Sym2 s = h.values[static_cast<std::size_t>(tri[0])];
  s += h.values[static_cast<std::size_t>(tri[1])];
  s += h.values[static_cast<std::size_t>(tri[2])];
  return s * (1.0 / 3.0);
}

ElementMetricTerms element_metric_terms(const TriMesh& mesh, const HessianField& h, const DiffusionField& d, int t) {
  ElementMetricTerms terms;
  terms.h_k = element_average_hessian(mesh, h, t);
  const double det = terms.h_k.det();
  if (!(det > 0.0) || !is_spd(terms.h_k))
    fail(ErrorCode::SemidefiniteResult,
         "anisotropic_metric: averaged Hessian of element " + std::to_string(t) + " is not SPD");
  const Mat2 hk = Mat2::from(terms.h_k);
  const Mat2 hk_inv = hk.inverse();
  const auto mid = edge_midpoints(mesh, t);
  const auto& tri = mesh.triangle(t);
  double l2 = 0.0;
  for (int q = 0; q < 3; ++q) {
    terms.max_hd = std::max(terms.max_hd, norm2(hk * Mat2::from(d(mid[static_cast<std::size_t>(q)]))));
    // midpoint q lies on the edge opposite vertex q
    const Sym2 hq = (h.values[static_cast<std::size_t>(tri[(q + 1) % 3])] +
                     h.values[static_cast<std::size_t>(tri[(q + 2) % 3])]) *
                    0.5;
    const double r = norm2(hk_inv * Mat2::from(hq));
    l2 += r * r / 3.0;
  }
  terms.l2_ratio = l2;
  terms.theta = std::pow(det, -0.25) * std::sqrt(terms.max_hd) * std::sqrt(terms.l2_ratio);
  return terms;
}

MetricField anisotropic_metric(const TriMesh& mesh, const HessianField& h, const DiffusionField& d) {
  ANISOEIG_REQUIRE(static_cast<int>(h.values.size()) == mesh.vertex_count(), ErrorCode::InvalidInput,
                   "anisotropic_metric: Hessian field does not match the mesh");
  MetricField out;
  out.mode = MetricMode::Anisotropic;
  out.values.resize(static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto terms = element_metric_terms(mesh, h, d, t);
    out.values[static_cast<std::size_t>(t)] = terms.theta * terms.h_k;
  }
  out.sigma_h = metric_sigma(mesh, out.values);
  return out;
}

MetricField isotropic_metric(const TriMesh& mesh, const HessianField& h) {
  ANISOEIG_REQUIRE(static_cast<int>(h.values.size()) == mesh.vertex_count(), ErrorCode::InvalidInput,
                   "isotropic_metric: Hessian field does not match the mesh");
  MetricField out;
  out.mode = MetricMode::Isotropic;
  out.values.resize(static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t)
    out.values[static_cast<std::size_t>(t)] = Sym2::identity(norm2(element_average_hessian(mesh, h, t)));
  out.sigma_h = metric_sigma(mesh, out.values);
  return out;
}

MetricField identity_metric(const TriMesh& mesh) {
  MetricField out;
  out.mode = MetricMode::Identity;
  out.values.assign(static_cast<std::size_t>(mesh.triangle_count()), Sym2::identity());
  out.sigma_h = metric_sigma(mesh, out.values);
  return out;
}

MetricField normalize_to_target(const TriMesh& mesh, const MetricField& metric, double n_target, double eps_len) {
  ANISOEIG_REQUIRE(metric.sigma_h > 0.0, ErrorCode::InvalidInput, "normalize_to_target: sigma_h must be positive");
  ANISOEIG_REQUIRE(n_target >= 1.0, ErrorCode::InvalidInput, "normalize_to_target: target must be at least 1");
  const double s = n_target / metric.sigma_h;
  const double diam = mesh.diameter();
  const double floor = (eps_len / diam) * (eps_len / diam);
  MetricField out;
  out.mode = metric.mode;
  out.values.reserve(metric.values.size());
  for (const Sym2& m : metric.values) {
    const Sym2 scaled = s * m;
    SymEigen e = eig(scaled);
    if (e.values[0] >= floor) {
      out.values.push_back(scaled);
      continue;
    }
    for (double& l : e.values) l = std::max(l, floor);
    out.values.push_back(compose(e));
  }
  out.sigma_h = metric_sigma(mesh, out.values);
  return out;
}

double alignment_ratio(const Mat2& jacobian, const Sym2& m) {
  const Sym2 g = congruence(jacobian, m);
  const double det = g.det();
  if (!(det > 0.0)) return std::numeric_limits<double>::infinity();
  return g.trace() / (2.0 * std::sqrt(det));
}

QualityReport quality(const TriMesh& mesh, const MetricField& metric) {
  ANISOEIG_REQUIRE(static_cast<int>(metric.values.size()) == mesh.triangle_count(), ErrorCode::InvalidInput,
                   "quality: metric does not match the mesh");
  const double sigma = metric_sigma(mesh, metric.values);
  ANISOEIG_REQUIRE(sigma > 0.0, ErrorCode::InvalidInput, "quality: metric has zero volume");
  const double n = mesh.triangle_count();
  QualityReport r;
  r.equidistribution.resize(static_cast<std::size_t>(mesh.triangle_count()));
  r.alignment.resize(static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Sym2& m = metric.values[static_cast<std::size_t>(t)];
    const double eq = mesh.area(t) * std::sqrt(std::max(0.0, m.det())) * n / sigma;
    const double ali = alignment_ratio(affine_map(mesh, t).jacobian, m);
    r.equidistribution[static_cast<std::size_t>(t)] = eq;
    r.alignment[static_cast<std::size_t>(t)] = ali;
    r.c_eq = std::max(r.c_eq, eq);
    r.c_ali = std::max(r.c_ali, ali);
  }
  r.equidistribution_deciles = deciles(r.equidistribution);
  r.alignment_deciles = deciles(r.alignment);
  return r;
}

double metric_edge_length(const Sym2& m, const Point2& e) { return std::sqrt(std::max(0.0, m.quad(e))); }

double metric_edge_length(const Sym2& ma, const Sym2& mb, const Point2& e) {
  return metric_edge_length((ma + mb) * 0.5, e);
}

void write_metric(std::ostream& os, const MetricField& metric) {
  os << std::setprecision(17);
  for (std::size_t k = 0; k < metric.values.size(); ++k) {
    const Sym2& m = metric.values[k];
    os << k << ' ' << m.a11 << ' ' << m.a12 << ' ' << m.a22 << '\n';
  }
}

}  // namespace anisoeig
