// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "anisoeig/error.hpp"
#include "anisoeig/fem.hpp"

namespace anisoeig {

struct EigenSolution {
  Eigen::VectorXd values;        ///< nondecreasing
  Eigen::MatrixXd vectors;       ///< one M-orthonormal column per eigenvalue
  std::vector<double> residuals; ///< ||A u - l M u|| / (l ||M u||)
  int iterations = 0;            ///< restarts performed
};

struct EigenOptions {
  std::uint64_t seed = 0;
  int max_restarts = 500;
  /// Optional starting vectors (n rows); random columns fill the rest of the block.
  Eigen::MatrixXd initial;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, EigenSolution best)
      : Error(ErrorCode::Convergence, message), best_(std::move(best)) {}
  [[nodiscard]] const EigenSolution& best() const noexcept { return best_; }

 private:
  EigenSolution best_;
};

/// k smallest eigenpairs of A u = l M u by a restarted block Krylov method on
/// A^{-1} M with a sparse Cholesky factorization of A.
EigenSolution smallest_eigenpairs(const SparseSym& a, const SparseSym& m, int k, double tol = 1e-8,
                                  const EigenOptions& options = {});

/// Relative residual of one pair, computed from scratch.
double eigen_residual(const SparseSym& a, const SparseSym& m, double lambda, const Eigen::VectorXd& u);

}  // namespace anisoeig
