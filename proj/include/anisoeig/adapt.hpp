// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "anisoeig/eigsolve.hpp"
#include "anisoeig/mesh.hpp"
#include "anisoeig/metric.hpp"
#include "anisoeig/problems.hpp"

namespace anisoeig {

/// Continuous metric built from a per-element field: vertex tensors are the
/// intersection of the incident element tensors, rescaled to the metric volume
/// of the field, interpolated linearly inside each triangle and taken from the
/// nearest triangle outside the mesh.
class MetricSampler {
 public:
  MetricSampler(const TriMesh& background, const MetricField& metric);

  [[nodiscard]] Sym2 operator()(const Point2& p) const;
  [[nodiscard]] const std::vector<Sym2>& vertex_values() const noexcept { return vertex_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::shared_ptr<const PointLocator> locator_;
  std::vector<Sym2> vertex_;
};

using MetricFunction = std::function<Sym2(const Point2&)>;

struct RemeshOptions {
  int max_passes = 30;
  double smoothing = 0.5;
};

struct RemeshStats {
  int passes = 0;
  int splits = 0;
  int collapses = 0;
  int flips = 0;
  int moves = 0;
};

/// Local remeshing towards unit edge length in the metric (normalized so that
/// a metric of total volume N yields about N elements): split, collapse, flip,
/// smooth. Corners never move; new boundary vertices are placed on the
/// geometry curves.
TriMesh remesh(const TriMesh& mesh, const MetricFunction& metric, const Geometry& geometry,
               const RemeshOptions& options = {}, RemeshStats* stats = nullptr);
TriMesh remesh(const TriMesh& mesh, const MetricField& metric, const Geometry& geometry,
               const RemeshOptions& options = {}, RemeshStats* stats = nullptr);

/// Element tensors of a metric function sampled at the centroids of mesh.
MetricField sample_metric(const TriMesh& mesh, const MetricFunction& metric);

/// Linear interpolation of per-vertex values onto another mesh's vertices.
/// Points outside the old mesh use the nearest element, clamped to the range
/// of its vertex values.
Eigen::MatrixXd transfer_solution(const TriMesh& old_mesh, const Eigen::MatrixXd& values, const TriMesh& new_mesh);

/// sigma_max / sigma_min of the affine map of triangle t.
double aspect_ratio(const TriMesh& mesh, int t);

struct AdaptConfig {
  int k = 4;
  double n_target = 1e4;
  int max_outer_iterations = 10;
  double eigenvalue_stall_tol = 1e-4;
  double alpha = 1e-2;
  MetricMode metric_mode = MetricMode::Anisotropic;
  GeometryMode geometry_mode = GeometryMode::ExactCurve;
  double eig_tol = 1e-8;
  std::uint64_t seed = 0;
  /// Boundary points of the initial mesh; 0 picks a spacing from n_target.
  int boundary_points = 0;
};

void validate(const AdaptConfig& config);

struct TraceRecord {
  int iteration = 0;
  int elements = 0;
  int vertices = 0;
  std::vector<double> eigenvalues;
  double c_eq = 0.0;
  double c_ali = 0.0;
  double sigma_h = 0.0;
  double seconds = 0.0;
};

struct AdaptTrace {
  std::vector<TraceRecord> records;
};

/// iteration,N,lambda_1..lambda_k,C_eq,C_ali,sigma_h,seconds
void write_trace_csv(std::ostream& os, const AdaptTrace& trace);

struct AdaptResult {
  TriMesh mesh;
  EigenSolution solution;
  AdaptTrace trace;
  Geometry geometry;
  /// Unnormalized metric computed from the final solution on the final mesh.
  std::optional<MetricField> metric;
};

/// Problem geometry for the configured mode; frozen-polygon mode freezes the
/// boundary polygon of the initial mesh.
struct Setup {
  Geometry geometry;
  TriMesh mesh;
};
Setup initial_setup(const EigenProblem& problem, const AdaptConfig& config);

/// Solves on one mesh: eigenpairs with vectors expanded to all vertices.
struct MeshSolution {
  EigenSolution solution;
  Eigen::MatrixXd nodal;  ///< vertex_count x k, zero on the boundary
};
MeshSolution solve_on_mesh(const EigenProblem& problem, const TriMesh& mesh, const AdaptConfig& config,
                           const Eigen::MatrixXd* warm_start = nullptr);

/// Metric of the configured mode built from nodal eigenfunctions.
MetricField solution_metric(const EigenProblem& problem, const TriMesh& mesh, const Eigen::MatrixXd& nodal,
                            const AdaptConfig& config);

/// Solve, recover, build the metric, remesh; repeated until the eigenvalues
/// stall or the iteration cap is reached.
AdaptResult adapt_loop(const EigenProblem& problem, const AdaptConfig& config);
AdaptResult adapt_loop(const EigenProblem& problem, const AdaptConfig& config, Setup setup);

}  // namespace anisoeig
