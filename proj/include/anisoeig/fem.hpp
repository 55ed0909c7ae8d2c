// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "anisoeig/error.hpp"
#include "anisoeig/mesh.hpp"
#include "anisoeig/sym2.hpp"

namespace anisoeig {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Symmetric sparse matrix over a set of degrees of freedom.
struct SparseSym {
  SparseMatrix matrix;
  bool symmetric = true;

  [[nodiscard]] int size() const { return static_cast<int>(matrix.rows()); }
};

/// Diffusion tensor D(x); must be SPD wherever it is sampled.
using DiffusionField = std::function<Sym2(const Point2&)>;
/// Density rho(x) > 0.
using DensityField = std::function<double(const Point2&)>;

DiffusionField constant_diffusion(const Sym2& d = Sym2::identity());
DensityField constant_density(double rho = 1.0);

class CoefficientError : public Error {
 public:
  CoefficientError(const std::string& message, const Point2& where)
      : Error(ErrorCode::Coefficient, message), where_(where) {}
  [[nodiscard]] const Point2& point() const noexcept { return where_; }

 private:
  Point2 where_;
};

/// Interior vertices are the unknowns; dof_of_vertex is -1 on the boundary.
struct DofMap {
  std::vector<int> dof_of_vertex;
  std::vector<int> vertex_of_dof;

  [[nodiscard]] int size() const { return static_cast<int>(vertex_of_dof.size()); }
};

DofMap interior_dofs(const TriMesh& mesh);
/// Every vertex is a dof, in vertex order.
DofMap all_dofs(const TriMesh& mesh);

/// Gradients of the three P1 basis functions of triangle t.
std::array<Point2, 3> p1_gradients(const TriMesh& mesh, int t);

/// The three edge midpoints of triangle t, midpoint i opposite vertex i.
std::array<Point2, 3> edge_midpoints(const TriMesh& mesh, int t);

std::array<std::array<double, 3>, 3> element_stiffness(const TriMesh& mesh, int t, const DiffusionField& d);
std::array<std::array<double, 3>, 3> element_mass(const TriMesh& mesh, int t, const DensityField& rho);

SparseSym assemble_stiffness(const TriMesh& mesh, const DiffusionField& d);
SparseSym assemble_mass(const TriMesh& mesh, const DensityField& rho);
SparseSym assemble_stiffness(const TriMesh& mesh, const DiffusionField& d, const DofMap& dofs);
SparseSym assemble_mass(const TriMesh& mesh, const DensityField& rho, const DofMap& dofs);
/// Mass matrix over all vertices, boundary included.
SparseSym assemble_mass_full(const TriMesh& mesh, const DensityField& rho);

/// sqrt(u^T A u); SpdViolation if the form is negative beyond roundoff.
double energy_norm(const SparseSym& a, const Eigen::VectorXd& u);

/// Interior coefficients expanded to all vertices, zero on the boundary.
Eigen::VectorXd extend_by_zero(const DofMap& dofs, const Eigen::VectorXd& interior, int vertex_count);

/// "row col value" per stored entry, 0-based.
void write_coordinate(std::ostream& os, const SparseSym& a);

}  // namespace anisoeig
