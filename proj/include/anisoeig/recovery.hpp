// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "anisoeig/mesh.hpp"
#include "anisoeig/sym2.hpp"

namespace anisoeig {

/// One symmetric tensor per mesh vertex.
struct HessianField {
  std::vector<Sym2> values;
  int eigenfunction = -1;  ///< source index, -1 for combined fields
  double alpha = 0.0;      ///< regularization applied, 0 for raw fields
};

/// Vertex Hessians of nodal values u (one entry per vertex) by local
/// least-squares quadratic fits.
HessianField recover_hessian(const TriMesh& mesh, const Eigen::VectorXd& u);

/// Same fit for every column of u (vertex_count x k), sharing each vertex's
/// factorization across columns.
std::vector<HessianField> recover_hessians(const TriMesh& mesh, const Eigen::MatrixXd& u);

/// Per vertex: |H_j| + alpha I for each field, intersected in index order.
HessianField build_majorant(std::span<const HessianField> fields, double alpha);

}  // namespace anisoeig
