// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/sym2.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anisoeig/error.hpp"

namespace anisoeig {

bool Sym2::finite() const {
  return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a22);
}

Mat2 Mat2::inverse() const {
  const double d = det();
  ANISOEIG_REQUIRE(d != 0.0 && std::isfinite(d), ErrorCode::InvalidInput,
                   "Mat2::inverse: singular matrix");
  return {m11 / d, -m01 / d, -m10 / d, m00 / d};
}

Sym2 congruence(const Mat2& b, const Sym2& s) {
  const Mat2 sb = Mat2::from(s) * b;
  const Mat2 r = b.transpose() * sb;
  return {r.m00, 0.5 * (r.m01 + r.m10), r.m11};
}

double norm2(const Mat2& m) {
  // sqrt of the largest eigenvalue of m^T m
  const Sym2 g{m.m00 * m.m00 + m.m10 * m.m10, m.m00 * m.m01 + m.m10 * m.m11,
               m.m01 * m.m01 + m.m11 * m.m11};
  return std::sqrt(std::max(0.0, eig(g).values[1]));
}

SymEigen eig(const Sym2& a) {
  ANISOEIG_REQUIRE(a.finite(), ErrorCode::InvalidInput, "eig: non-finite tensor entry");
  const double mean = 0.5 * (a.a11 + a.a22);
  const double half_diff = 0.5 * (a.a11 - a.a22);
  const double radius = std::hypot(half_diff, a.a12);

  SymEigen out;
  out.values = {mean - radius, mean + radius};
  if (radius == 0.0) {
    out.vectors = {Point2{1.0, 0.0}, Point2{0.0, 1.0}};
    return out;
  }
  // Eigenvector of the larger eigenvalue; pick the row of (A - lambda I)
  // that avoids cancellation.
  Point2 v = half_diff >= 0.0 ? Point2{half_diff + radius, a.a12}
                              : Point2{a.a12, radius - half_diff};
  v *= 1.0 / norm(v);
  out.vectors = {Point2{-v.y, v.x}, v};
  return out;
}

Sym2 compose(const SymEigen& e) {
  Sym2 r;
  for (int i = 0; i < 2; ++i) {
    const Point2& v = e.vectors[i];
    const double l = e.values[i];
    r.a11 += l * v.x * v.x;
    r.a12 += l * v.x * v.y;
    r.a22 += l * v.y * v.y;
  }
  return r;
}

double norm2(const Sym2& a) {
  const auto e = eig(a);
  return std::max(std::abs(e.values[0]), std::abs(e.values[1]));
}

bool is_spd(const Sym2& s) {
  if (!s.finite()) return false;
  return s.a11 > 0.0 && s.det() > 0.0 && eig(s).values[0] > 0.0;
}

Spd2::Spd2(const Sym2& s) : s_(s) {
  if (!is_spd(s)) {
    std::ostringstream os;
    os << "Spd2: tensor [[" << s.a11 << ", " << s.a12 << "], [" << s.a12 << ", " << s.a22
       << "]] is not positive definite";
    fail(ErrorCode::InvalidInput, os.str());
  }
}

Spd2 abs_regularize(const Sym2& h, double alpha) {
  ANISOEIG_REQUIRE(alpha >= 0.0 && std::isfinite(alpha), ErrorCode::InvalidInput,
                   "abs_regularize: alpha must be a nonnegative finite number");
  // |H| = |-H|; decompose a sign-canonical representative so both give
  // bit-identical results.
  const double key = h.trace() != 0.0 ? h.trace() : (h.a11 != 0.0 ? h.a11 : h.a12);
  SymEigen e = eig(key < 0.0 ? -1.0 * h : h);
  for (double& l : e.values) l = std::abs(l) + alpha;
  if (!(e.values[0] > 0.0)) {
    fail(ErrorCode::SemidefiniteResult,
         "abs_regularize: singular tensor with alpha = 0 gives a semidefinite result");
  }
  Sym2 r = compose(e);
  if (!is_spd(r)) {
    // Rounding in the recomposition of a nearly singular tensor.
    fail(ErrorCode::SemidefiniteResult, "abs_regularize: result lost definiteness");
  }
  return Spd2(r);
}

Spd2 intersect(const Spd2& a, const Spd2& b) {
  // B = L L^T with L lower triangular.
  const double l11 = std::sqrt(b.a11());
  const double l21 = b.a12() / l11;
  const double l22 = std::sqrt(b.a22() - l21 * l21);
  ANISOEIG_REQUIRE(std::isfinite(l22) && l22 > 0.0, ErrorCode::InvalidInput,
                   "intersect: second argument is not positive definite");
  const Mat2 l{l11, 0.0, l21, l22};
  const Mat2 linv = l.inverse();
  // C = L^{-1} A L^{-T}; eigenvalues are the generalized sigma_i.
  const Sym2 c = congruence(linv.transpose(), a.sym());
  SymEigen e = eig(c);
  for (double& s : e.values) s = std::max(1.0, s);
  // Result = L Q diag(max(1, sigma)) Q^T L^T.
  const Sym2 r = congruence(l.transpose(), compose(e));
  return Spd2(r);
}

Spd2 sequential_intersection(std::span<const Spd2> tensors) {
  ANISOEIG_REQUIRE(!tensors.empty(), ErrorCode::InvalidInput,
                   "sequential_intersection: empty list");
  Spd2 acc = tensors.front();
  for (std::size_t i = 1; i < tensors.size(); ++i) acc = intersect(acc, tensors[i]);
  return acc;
}

}  // namespace anisoeig
