// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "anisoeig/fem.hpp"
#include "anisoeig/mesh.hpp"
#include "anisoeig/recovery.hpp"
#include "anisoeig/sym2.hpp"

namespace anisoeig {

enum class MetricMode { Anisotropic, Isotropic, Identity };

const char* to_string(MetricMode mode) noexcept;
/// Accepts "anisotropic", "isotropic", "identity"; Config error otherwise.
MetricMode parse_metric_mode(const std::string& text);

/// One tensor per element of the mesh it was built on.
struct MetricField {
  std::vector<Sym2> values;
  double sigma_h = 0.0;
  MetricMode mode = MetricMode::Identity;
};

/// sum_K |K| det(M_K)^{1/2}
double metric_sigma(const TriMesh& mesh, const std::vector<Sym2>& values);

/// Mean of the three vertex values of triangle t.
Sym2 element_average_hessian(const TriMesh& mesh, const HessianField& h, int t);

/// Factors of the anisotropic metric on one element: M_K = theta * H_K.
struct ElementMetricTerms {
  Sym2 h_k;
  double max_hd = 0.0;       ///< max over edge midpoints of ||H_K D(x)||_2
  double l2_ratio = 0.0;     ///< (1/|K|) ||H_K^{-1} H||^2_{L2(K)}
  double theta = 0.0;
};
ElementMetricTerms element_metric_terms(const TriMesh& mesh, const HessianField& h, const DiffusionField& d, int t);

MetricField anisotropic_metric(const TriMesh& mesh, const HessianField& h, const DiffusionField& d);
MetricField isotropic_metric(const TriMesh& mesh, const HessianField& h);
MetricField identity_metric(const TriMesh& mesh);

/// Scales every tensor by N / sigma_h, then raises eigenvalues to at least
/// (eps_len / diameter)^2. sigma_h of the result is recomputed.
MetricField normalize_to_target(const TriMesh& mesh, const MetricField& metric, double n_target,
                                double eps_len = 1e-3);

/// tr(J^T M J) / (2 det(J^T M J)^{1/2}); >= 1 with equality for metric-equilateral K.
double alignment_ratio(const Mat2& jacobian, const Sym2& m);

struct QualityReport {
  double c_eq = 0.0;
  double c_ali = 0.0;
  std::vector<double> equidistribution;  ///< |K| det(M_K)^{1/2} N / sigma_h per element
  std::vector<double> alignment;         ///< per element
  std::array<double, 11> equidistribution_deciles{};
  std::array<double, 11> alignment_deciles{};
};
QualityReport quality(const TriMesh& mesh, const MetricField& metric);

/// sqrt(e^T M e)
double metric_edge_length(const Sym2& m, const Point2& e);
/// Length under the average of two endpoint metrics.
double metric_edge_length(const Sym2& ma, const Sym2& mb, const Point2& e);

/// "K m11 m12 m22" per element.
void write_metric(std::ostream& os, const MetricField& metric);

}  // namespace anisoeig
