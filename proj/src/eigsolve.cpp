// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/eigsolve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace anisoeig {

namespace {

/// M-orthonormal basis with its image under M kept alongside.
class Basis {
 public:
  Basis(const SparseMatrix& m, int n, int capacity) : m_(m), v_(n, capacity), mv_(n, capacity) {}

  [[nodiscard]] int size() const { return size_; }
  [[nodiscard]] int capacity() const { return static_cast<int>(v_.cols()); }
  [[nodiscard]] auto v() const { return v_.leftCols(size_); }
  [[nodiscard]] auto mv() const { return mv_.leftCols(size_); }
  void clear() { size_ = 0; }

  /// Orthogonalizes w against the basis (two classical Gram-Schmidt passes)
  /// and appends it unless it is numerically dependent.
  bool append(Eigen::VectorXd w) {
    if (size_ >= capacity()) return false;
    Eigen::VectorXd mw = m_ * w;
    const double before = std::sqrt(std::max(0.0, w.dot(mw)));
    if (!(before > 0.0) || !std::isfinite(before)) return false;
    for (int pass = 0; pass < 2 && size_ > 0; ++pass) {
      const Eigen::VectorXd c = mv().transpose() * w;
      w.noalias() -= v() * c;
    }
    mw = m_ * w;
    const double after = std::sqrt(std::max(0.0, w.dot(mw)));
    if (!(after > 1e-10 * before)) return false;
    v_.col(size_) = w / after;
    mv_.col(size_) = mw / after;
    ++size_;
    return true;
  }

  /// Replaces the basis by the given M-orthonormal columns.
  void assign(const Eigen::MatrixXd& v, const Eigen::MatrixXd& mv) {
    size_ = static_cast<int>(v.cols());
    v_.leftCols(size_) = v;
    mv_.leftCols(size_) = mv;
  }

 private:
  const SparseMatrix& m_;
  Eigen::MatrixXd v_;
  Eigen::MatrixXd mv_;
  int size_ = 0;
};

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  return x;
}

void normalize_sign(Eigen::Ref<Eigen::VectorXd> u) {
  Eigen::Index imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  if (u[imax] < 0.0) u = -u;
}

}  // namespace

double eigen_residual(const SparseSym& a, const SparseSym& m, double lambda, const Eigen::VectorXd& u) {
  const Eigen::VectorXd mu = m.matrix * u;
  const Eigen::VectorXd r = a.matrix * u - lambda * mu;
  return r.norm() / (std::abs(lambda) * mu.norm());
}

EigenSolution smallest_eigenpairs(const SparseSym& a, const SparseSym& m, int k, double tol,
                                  const EigenOptions& options) {
  const int n = a.size();
  ANISOEIG_REQUIRE(m.size() == n, ErrorCode::InvalidInput, "smallest_eigenpairs: dimension mismatch");
  ANISOEIG_REQUIRE(k >= 1 && k <= n, ErrorCode::InvalidInput, "smallest_eigenpairs: need 1 <= k <= n");
  ANISOEIG_REQUIRE(tol > 0.0 && tol <= 1e-2, ErrorCode::InvalidInput, "smallest_eigenpairs: tol must lie in (0, 1e-2]");
  ANISOEIG_REQUIRE(options.initial.size() == 0 || options.initial.rows() == n, ErrorCode::InvalidInput,
                   "smallest_eigenpairs: initial block has wrong row count");

  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
  llt.compute(a.matrix);
  if (llt.info() != Eigen::Success) fail(ErrorCode::Numeric, "smallest_eigenpairs: Cholesky factorization of A failed");

  const int block = std::min(n, k + 3);
  const int capacity = std::min(n, std::max(5 * block, 30));
  Basis basis(m.matrix, n, capacity);
  std::mt19937_64 rng(options.seed);

  for (int j = 0; j < options.initial.cols() && basis.size() < block; ++j) basis.append(options.initial.col(j));
  for (int tries = 0; basis.size() < block && tries < 4 * block; ++tries) basis.append(random_vector(rng, n));
  ANISOEIG_REQUIRE(basis.size() > 0, ErrorCode::Numeric, "smallest_eigenpairs: could not build a starting block");

  EigenSolution sol;
  sol.residuals.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  Eigen::MatrixXd expand = basis.v();
  // Residuals that stop shrinking have hit the roundoff floor of A and M.
  constexpr int kStagnationWindow = 25;
  double best_residual = std::numeric_limits<double>::infinity();
  int best_restart = 0;

  auto give_up = [&](const std::string& reason) {
    for (int j = 0; j < k; ++j) {
      normalize_sign(sol.vectors.col(j));
      sol.residuals[static_cast<std::size_t>(j)] = eigen_residual(a, m, sol.values[j], sol.vectors.col(j));
    }
    throw ConvergenceError("smallest_eigenpairs: " + reason, sol);
  };

  for (int restart = 0;; ++restart) {
    // Grow the Krylov space block by block.
    while (basis.size() < capacity) {
      const int before = basis.size();
      Eigen::MatrixXd next(n, expand.cols());
      for (int j = 0; j < expand.cols(); ++j) {
        Eigen::VectorXd w = llt.solve(m.matrix * expand.col(j));
        if (!w.allFinite()) fail(ErrorCode::Numeric, "smallest_eigenpairs: non-finite iterate");
        next.col(j) = w;
      }
      int added = 0;
      for (int j = 0; j < next.cols(); ++j)
        if (basis.append(next.col(j))) ++added;
      if (added == 0) {
        // Invariant subspace or exhausted dimension: top up with random
        // directions so small problems still reach their full space.
        for (int tries = 0; tries < block && basis.size() < capacity; ++tries) basis.append(random_vector(rng, n));
        if (basis.size() == before) break;
      }
      expand = basis.v().rightCols(basis.size() - before);
    }

    // Rayleigh-Ritz with A on the M-orthonormal basis.
    const int dim = basis.size();
    const Eigen::MatrixXd av = a.matrix * basis.v();
    Eigen::MatrixXd t = basis.v().transpose() * av;
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(t);
    if (ritz.info() != Eigen::Success) fail(ErrorCode::Numeric, "smallest_eigenpairs: Ritz problem failed");

    const int keep = std::min(dim, block);
    const Eigen::MatrixXd s = ritz.eigenvectors().leftCols(keep);
    const Eigen::MatrixXd y = basis.v() * s;
    const Eigen::MatrixXd my = basis.mv() * s;

    sol.values = ritz.eigenvalues().head(k);
    sol.vectors = y.leftCols(k);
    sol.iterations = restart;
    bool converged = true;
    for (int j = 0; j < k; ++j) {
      const double lam = sol.values[j];
      const Eigen::VectorXd r = av * s.col(j) - lam * my.col(j);
      const double res = r.norm() / (std::abs(lam) * my.col(j).norm());
      sol.residuals[static_cast<std::size_t>(j)] = res;
      if (!(lam > 0.0)) fail(ErrorCode::Numeric, "smallest_eigenpairs: nonpositive Ritz value");
      if (!(res <= 0.5 * tol)) converged = false;
    }
    if (converged || dim == n) break;
    const double worst = *std::max_element(sol.residuals.begin(), sol.residuals.end());
    if (worst < 0.5 * best_residual) {
      best_residual = worst;
      best_restart = restart;
    }
    if (restart >= options.max_restarts)
      give_up("no convergence within " + std::to_string(options.max_restarts) + " restarts");
    if (restart - best_restart >= kStagnationWindow)
      give_up("residuals stagnated at " + std::to_string(worst) + " above the tolerance");
    basis.assign(y, my);
    expand = y;
  }

  for (int j = 0; j < k; ++j) {
    normalize_sign(sol.vectors.col(j));
    sol.residuals[static_cast<std::size_t>(j)] = eigen_residual(a, m, sol.values[j], sol.vectors.col(j));
  }
  return sol;
}

}  // namespace anisoeig
