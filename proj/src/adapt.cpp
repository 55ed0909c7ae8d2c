// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "anisoeig/adapt.hpp"
#include "anisoeig/error.hpp"
#include "anisoeig/fem.hpp"
#include "anisoeig/recovery.hpp"

namespace anisoeig {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Element count of the first mesh; the first remesh reaches n_target.
double initial_elements(const AdaptConfig& config) { return std::clamp(config.n_target / 4.0, 64.0, 2000.0); }

/// Edge length of an equilateral mesh with n elements on area |Omega|.
double spacing_for(double area, double n) { return std::sqrt(4.0 * area / (std::sqrt(3.0) * n)); }

}  // namespace

void validate(const AdaptConfig& config) {
  ANISOEIG_REQUIRE(config.k >= 1 && config.k <= 40, ErrorCode::Config, "k must lie in [1, 40]");
  ANISOEIG_REQUIRE(config.n_target >= 16.0 && config.n_target <= 1e7, ErrorCode::Config,
                   "n_target must lie in [16, 1e7]");
  ANISOEIG_REQUIRE(config.max_outer_iterations >= 1, ErrorCode::Config, "max_outer_iterations must be positive");
  ANISOEIG_REQUIRE(config.eigenvalue_stall_tol >= 0.0, ErrorCode::Config, "eigenvalue_stall_tol must be >= 0");
  ANISOEIG_REQUIRE(config.alpha > 0.0 && std::isfinite(config.alpha), ErrorCode::Config, "alpha must be positive");
  ANISOEIG_REQUIRE(config.eig_tol > 0.0 && config.eig_tol <= 1e-2, ErrorCode::Config, "eig_tol must lie in (0, 1e-2]");
  ANISOEIG_REQUIRE(config.boundary_points == 0 || config.boundary_points >= 3, ErrorCode::Config,
                   "boundary_points must be 0 (automatic) or at least 3");
}

void write_trace_csv(std::ostream& os, const AdaptTrace& trace) {
  const std::size_t k = trace.records.empty() ? 0 : trace.records.front().eigenvalues.size();
  os << "iteration,N";
  for (std::size_t j = 1; j <= k; ++j) os << ",lambda_" << j;
  os << ",C_eq,C_ali,sigma_h,seconds\n";
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(17);
  for (const TraceRecord& r : trace.records) {
    os << r.iteration << ',' << r.elements;
    for (double l : r.eigenvalues) os << ',' << l;
    os << ',' << r.c_eq << ',' << r.c_ali << ',' << r.sigma_h << ',' << std::setprecision(6) << r.seconds
       << std::setprecision(17) << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

Setup initial_setup(const EigenProblem& problem, const AdaptConfig& config) {
  validate(config);
  const Geometry& exact = problem.geometry;
  const double h = spacing_for(exact.area(), initial_elements(config));
  const int corners = static_cast<int>(exact.corners().size());
  int nb = config.boundary_points;
  if (nb == 0) nb = std::max({3, corners, static_cast<int>(std::lround(exact.perimeter() / h))});
  ANISOEIG_REQUIRE(nb >= std::max(3, corners), ErrorCode::Config,
                   "boundary_points must be at least the number of corners (" + std::to_string(corners) + ")");
  if (config.geometry_mode == GeometryMode::ExactCurve) return {exact, initial_mesh(exact, nb, h)};
  const TriMesh first = initial_mesh(exact, nb, h);
  const std::vector<Point2> loop = boundary_loop(first);
  Geometry frozen = Geometry::frozen_polygon(loop);
  TriMesh mesh = initial_mesh(frozen, static_cast<int>(loop.size()), h);
  return {std::move(frozen), std::move(mesh)};
}

MeshSolution solve_on_mesh(const EigenProblem& problem, const TriMesh& mesh, const AdaptConfig& config,
                           const Eigen::MatrixXd* warm_start) {
  const DofMap dofs = interior_dofs(mesh);
  ANISOEIG_REQUIRE(dofs.size() >= config.k, ErrorCode::InvalidInput,
                   "mesh has " + std::to_string(dofs.size()) + " interior vertices, fewer than k");
  const SparseSym a = assemble_stiffness(mesh, problem.diffusion, dofs);
  const SparseSym m = assemble_mass(mesh, problem.density, dofs);
  EigenOptions options;
  options.seed = config.seed;
  if (warm_start != nullptr && warm_start->rows() == mesh.vertex_count()) {
    options.initial.resize(dofs.size(), warm_start->cols());
    for (int i = 0; i < dofs.size(); ++i)
      options.initial.row(i) = warm_start->row(dofs.vertex_of_dof[static_cast<std::size_t>(i)]);
  }
  MeshSolution out;
  try {
    out.solution = smallest_eigenpairs(a, m, config.k, config.eig_tol, options);
  } catch (const ConvergenceError& e) {
    // Strong diffusion contrast can put the roundoff floor of the residual
    // above eig_tol. Eigenvalue errors scale with the squared residual, so an
    // iterate within sqrt(eig_tol) is still accurate to about eig_tol.
    const auto& r = e.best().residuals;
    if (r.empty() || *std::max_element(r.begin(), r.end()) > std::sqrt(config.eig_tol)) throw;
    out.solution = e.best();
  }
  out.nodal = Eigen::MatrixXd::Zero(mesh.vertex_count(), config.k);
  for (int j = 0; j < config.k; ++j)
    out.nodal.col(j) = extend_by_zero(dofs, out.solution.vectors.col(j), mesh.vertex_count());
  return out;
}

MetricField solution_metric(const EigenProblem& problem, const TriMesh& mesh, const Eigen::MatrixXd& nodal,
                            const AdaptConfig& config) {
  if (config.metric_mode == MetricMode::Identity) return identity_metric(mesh);
  const std::vector<HessianField> fields = recover_hessians(mesh, nodal);
  const HessianField majorant = build_majorant(fields, config.alpha);
  if (config.metric_mode == MetricMode::Isotropic) return isotropic_metric(mesh, majorant);
  return anisotropic_metric(mesh, majorant, problem.diffusion);
}

AdaptResult adapt_loop(const EigenProblem& problem, const AdaptConfig& config) {
  return adapt_loop(problem, config, initial_setup(problem, config));
}

AdaptResult adapt_loop(const EigenProblem& problem, const AdaptConfig& config, Setup setup) {
  validate(config);
  TriMesh mesh = std::move(setup.mesh);
  const Geometry geometry = std::move(setup.geometry);
  MetricField generating = identity_metric(mesh);
  Eigen::MatrixXd warm;
  AdaptTrace trace;
  MeshSolution current;
  std::optional<MetricField> metric;
  auto start = Clock::now();
  for (int it = 0;; ++it) {
    try {
      current = solve_on_mesh(problem, mesh, config, warm.size() > 0 ? &warm : nullptr);
      metric = solution_metric(problem, mesh, current.nodal, config);

      TraceRecord record;
      record.iteration = it;
      record.elements = mesh.triangle_count();
      record.vertices = mesh.vertex_count();
      record.eigenvalues.assign(current.solution.values.data(),
                                current.solution.values.data() + current.solution.values.size());
      const QualityReport q = quality(mesh, generating);
      record.c_eq = q.c_eq;
      record.c_ali = q.c_ali;
      record.sigma_h = metric->sigma_h;
      record.seconds = seconds_since(start);
      trace.records.push_back(record);

      if (it + 1 >= config.max_outer_iterations) break;
      if (it > 0) {
        const auto& prev = trace.records[trace.records.size() - 2].eigenvalues;
        double change = 0.0;
        for (std::size_t j = 0; j < prev.size(); ++j)
          change = std::max(change, std::abs(record.eigenvalues[j] - prev[j]) / std::abs(record.eigenvalues[j]));
        if (change < config.eigenvalue_stall_tol) break;
      }

      start = Clock::now();
      const MetricField target = normalize_to_target(mesh, *metric, config.n_target);
      const MetricSampler sampler(mesh, target);
      const MetricFunction f = std::cref(sampler);
      TriMesh next = remesh(mesh, f, geometry);
      generating = sample_metric(next, f);
      warm = transfer_solution(mesh, current.nodal, next);
      mesh = std::move(next);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("adapt iteration " + std::to_string(it) + ": " + e.what(), e.best());
    } catch (const Error& e) {
      throw Error(e.code(), "adapt iteration " + std::to_string(it) + ": " + e.what());
    }
  }
  return AdaptResult{std::move(mesh), std::move(current.solution), std::move(trace), geometry, std::move(metric)};
}

}  // namespace anisoeig
