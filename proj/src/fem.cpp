// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/fem.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace anisoeig {

namespace {

std::string point_text(const Point2& p) {
  std::ostringstream os;
  os << std::setprecision(17) << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

template <class ElementFn>
SparseSym assemble(const TriMesh& mesh, const DofMap& dofs, ElementFn&& element) {
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto ke = element(t);
    for (int i = 0; i < 3; ++i) {
      const int r = dofs.dof_of_vertex[static_cast<std::size_t>(tri[i])];
      if (r < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int c = dofs.dof_of_vertex[static_cast<std::size_t>(tri[j])];
        if (c < 0) continue;
        triplets.emplace_back(r, c, ke[i][j]);
      }
    }
  }
  SparseSym out;
  out.matrix.resize(dofs.size(), dofs.size());
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  return out;
}

}  // namespace

DiffusionField constant_diffusion(const Sym2& d) {
  return [d](const Point2&) { return d; };
}

DensityField constant_density(double rho) {
  return [rho](const Point2&) { return rho; };
}

DofMap interior_dofs(const TriMesh& mesh) {
  DofMap map;
  map.dof_of_vertex.assign(static_cast<std::size_t>(mesh.vertex_count()), -1);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (mesh.is_boundary_vertex(v)) continue;
    map.dof_of_vertex[static_cast<std::size_t>(v)] = map.size();
    map.vertex_of_dof.push_back(v);
  }
  return map;
}

DofMap all_dofs(const TriMesh& mesh) {
  DofMap map;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    map.dof_of_vertex.push_back(v);
    map.vertex_of_dof.push_back(v);
  }
  return map;
}

std::array<Point2, 3> p1_gradients(const TriMesh& mesh, int t) {
  const auto p = mesh.corners_of(t);
  const double twice_area = orient(p[0], p[1], p[2]);
  std::array<Point2, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Point2& a = p[static_cast<std::size_t>((i + 1) % 3)];
    const Point2& b = p[static_cast<std::size_t>((i + 2) % 3)];
    // rotate the opposite edge b - a by -90 degrees
    g[static_cast<std::size_t>(i)] = {(a.y - b.y) / twice_area, (b.x - a.x) / twice_area};
  }
  return g;
}

std::array<Point2, 3> edge_midpoints(const TriMesh& mesh, int t) {
  const auto p = mesh.corners_of(t);
  return {(p[1] + p[2]) * 0.5, (p[2] + p[0]) * 0.5, (p[0] + p[1]) * 0.5};
}

std::array<std::array<double, 3>, 3> element_stiffness(const TriMesh& mesh, int t, const DiffusionField& d) {
  const auto g = p1_gradients(mesh, t);
  const auto mid = edge_midpoints(mesh, t);
  Sym2 avg{};
  for (const auto& x : mid) {
    const Sym2 dx = d(x);
    if (!dx.finite() || !is_spd(dx))
      throw CoefficientError("diffusion tensor is not SPD at " + point_text(x), x);
    avg += dx;
  }
  const double w = mesh.area(t) / 3.0;
  std::array<std::array<double, 3>, 3> k{};
  for (int i = 0; i < 3; ++i) {
    const Point2 dgi = avg.apply(g[static_cast<std::size_t>(i)]);
    for (int j = 0; j < 3; ++j) k[i][j] = w * dot(dgi, g[static_cast<std::size_t>(j)]);
  }
  // exact symmetry regardless of rounding in the products above
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) k[j][i] = k[i][j];
  return k;
}

std::array<std::array<double, 3>, 3> element_mass(const TriMesh& mesh, int t, const DensityField& rho) {
  const auto mid = edge_midpoints(mesh, t);
  std::array<double, 3> r{};
  for (int q = 0; q < 3; ++q) {
    const double v = rho(mid[static_cast<std::size_t>(q)]);
    if (!(v > 0.0) || !std::isfinite(v))
      throw CoefficientError("density is not positive at " + point_text(mid[static_cast<std::size_t>(q)]),
                             mid[static_cast<std::size_t>(q)]);
    r[static_cast<std::size_t>(q)] = v;
  }
  // At midpoint q, phi_q = 0 and the other two basis functions equal 1/2.
  const double w = mesh.area(t) / 12.0;
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int q = 0; q < 3; ++q)
        if (q != i && q != j) s += r[static_cast<std::size_t>(q)];
      m[i][j] = w * s;
    }
  }
  return m;
}

SparseSym assemble_stiffness(const TriMesh& mesh, const DiffusionField& d, const DofMap& dofs) {
  return assemble(mesh, dofs, [&](int t) { return element_stiffness(mesh, t, d); });
}

SparseSym assemble_mass(const TriMesh& mesh, const DensityField& rho, const DofMap& dofs) {
  return assemble(mesh, dofs, [&](int t) { return element_mass(mesh, t, rho); });
}

SparseSym assemble_stiffness(const TriMesh& mesh, const DiffusionField& d) {
  return assemble_stiffness(mesh, d, interior_dofs(mesh));
}

SparseSym assemble_mass(const TriMesh& mesh, const DensityField& rho) {
  return assemble_mass(mesh, rho, interior_dofs(mesh));
}

SparseSym assemble_mass_full(const TriMesh& mesh, const DensityField& rho) {
  return assemble_mass(mesh, rho, all_dofs(mesh));
}

double energy_norm(const SparseSym& a, const Eigen::VectorXd& u) {
  ANISOEIG_REQUIRE(u.size() == a.matrix.rows(), ErrorCode::InvalidInput, "energy_norm: dimension mismatch");
  const double q = u.dot(a.matrix * u);
  if (q < 0.0) {
    double norm_a = 0.0;
    for (int c = 0; c < a.matrix.outerSize(); ++c) {
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(a.matrix, c); it; ++it) s += std::abs(it.value());
      norm_a = std::max(norm_a, s);
    }
    if (q < -1e-12 * norm_a * u.squaredNorm())
      fail(ErrorCode::SpdViolation, "energy_norm: negative quadratic form");
    return 0.0;
  }
  return std::sqrt(q);
}

Eigen::VectorXd extend_by_zero(const DofMap& dofs, const Eigen::VectorXd& interior, int vertex_count) {
  ANISOEIG_REQUIRE(interior.size() == dofs.size(), ErrorCode::InvalidInput, "extend_by_zero: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(vertex_count);
  for (int i = 0; i < dofs.size(); ++i) out[dofs.vertex_of_dof[static_cast<std::size_t>(i)]] = interior[i];
  return out;
}

void write_coordinate(std::ostream& os, const SparseSym& a) {
  os << std::setprecision(17);
  for (int c = 0; c < a.matrix.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(a.matrix, c); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace anisoeig
