// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/recovery.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "anisoeig/error.hpp"

namespace anisoeig {

namespace {

constexpr double kMaxCondition = 1e8;

struct PatchFit {
  std::vector<int> points;  // fit vertex first
  Mat2 scale;               // local coordinates q = scale * (x - x_v)
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
};

bool try_fit(const TriMesh& mesh, int v, int ring, PatchFit& fit) {
  std::vector<int> patch = vertex_patch(mesh, v, ring);
  fit.points.assign(1, v);
  fit.points.insert(fit.points.end(), patch.begin(), patch.end());
  const int n = static_cast<int>(fit.points.size());
  if (n < 6) return false;

  // Whiten the offsets by their second moment so that stretched patches from
  // anisotropic meshes are as well conditioned as isotropic ones, then scale
  // the farthest point to unit distance.
  const Point2 c = mesh.vertex(v);
  Sym2 moment{};
  for (int p : patch) {
    const Point2 d = mesh.vertex(p) - c;
    moment += Sym2{d.x * d.x, d.x * d.y, d.y * d.y};
  }
  const SymEigen e = eig(moment);
  if (!(e.values[0] > 1e-14 * e.values[1])) return false;
  const Point2 v0 = e.vectors[0], v1 = e.vectors[1];
  const double s0 = 1.0 / std::sqrt(e.values[0]), s1 = 1.0 / std::sqrt(e.values[1]);
  Mat2 w{s0 * v0.x, s0 * v0.y, s1 * v1.x, s1 * v1.y};
  double r = 0.0;
  for (int p : patch) r = std::max(r, norm(w.apply(mesh.vertex(p) - c)));
  w = Mat2{w.m00 / r, w.m01 / r, w.m10 / r, w.m11 / r};
  fit.scale = w;

  Eigen::MatrixXd design(n, 6);
  for (int i = 0; i < n; ++i) {
    const Point2 q = w.apply(mesh.vertex(fit.points[static_cast<std::size_t>(i)]) - c);
    design.row(i) << 1.0, q.x, q.y, q.x * q.x, q.x * q.y, q.y * q.y;
  }
  const Eigen::MatrixXd normal = design.transpose() * design;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normal, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()[0];
  const double hi = es.eigenvalues()[5];
  if (!(lo > 0.0) || hi / lo > kMaxCondition) return false;
  fit.qr.compute(design);
  return true;
}

}  // namespace

std::vector<HessianField> recover_hessians(const TriMesh& mesh, const Eigen::MatrixXd& u) {
  ANISOEIG_REQUIRE(u.rows() == mesh.vertex_count(), ErrorCode::InvalidInput,
                   "recover_hessians: one value per vertex is required");
  const int k = static_cast<int>(u.cols());
  std::vector<HessianField> out(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    out[static_cast<std::size_t>(j)].values.resize(static_cast<std::size_t>(mesh.vertex_count()));
    out[static_cast<std::size_t>(j)].eigenfunction = j;
  }

  PatchFit fit;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!try_fit(mesh, v, 1, fit) && !try_fit(mesh, v, 2, fit))
      fail(ErrorCode::Recovery, "recover_hessian: patch of vertex " + std::to_string(v) +
                                    " is rank deficient even at ring 2");
    const int n = static_cast<int>(fit.points.size());
    Eigen::MatrixXd rhs(n, k);
    for (int i = 0; i < n; ++i) rhs.row(i) = u.row(fit.points[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd coef = fit.qr.solve(rhs);
    for (int j = 0; j < k; ++j) {
      const Sym2 local{2.0 * coef(3, j), coef(4, j), 2.0 * coef(5, j)};
      out[static_cast<std::size_t>(j)].values[static_cast<std::size_t>(v)] = congruence(fit.scale, local);
    }
  }
  return out;
}

HessianField recover_hessian(const TriMesh& mesh, const Eigen::VectorXd& u) {
  auto fields = recover_hessians(mesh, u);
  return std::move(fields.front());
}

HessianField build_majorant(std::span<const HessianField> fields, double alpha) {
  ANISOEIG_REQUIRE(!fields.empty(), ErrorCode::InvalidInput, "build_majorant: no fields");
  ANISOEIG_REQUIRE(alpha > 0.0, ErrorCode::InvalidInput, "build_majorant: alpha must be positive");
  const std::size_t nv = fields.front().values.size();
  for (const auto& f : fields)
    ANISOEIG_REQUIRE(f.values.size() == nv, ErrorCode::InvalidInput, "build_majorant: fields differ in size");

  HessianField out;
  out.alpha = alpha;
  out.values.resize(nv);
  std::vector<Spd2> terms;
  terms.reserve(fields.size());
  for (std::size_t v = 0; v < nv; ++v) {
    terms.clear();
    for (const auto& f : fields) terms.push_back(abs_regularize(f.values[v], alpha));
    out.values[v] = sequential_intersection(terms).sym();
  }
  return out;
}

}  // namespace anisoeig
