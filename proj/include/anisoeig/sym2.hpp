// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>

#include "anisoeig/point.hpp"

namespace anisoeig {

/// Symmetric 2x2 tensor stored by its upper triangle.
struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  static constexpr Sym2 identity(double s = 1.0) { return {s, 0.0, s}; }
  static constexpr Sym2 diag(double d1, double d2) { return {d1, 0.0, d2}; }

  [[nodiscard]] constexpr double trace() const { return a11 + a22; }
  [[nodiscard]] constexpr double det() const { return a11 * a22 - a12 * a12; }
  [[nodiscard]] constexpr Point2 apply(const Point2& v) const {
    return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y};
  }
  /// v^T A v
  [[nodiscard]] constexpr double quad(const Point2& v) const {
    return a11 * v.x * v.x + 2.0 * a12 * v.x * v.y + a22 * v.y * v.y;
  }
  [[nodiscard]] bool finite() const;

  constexpr Sym2& operator+=(const Sym2& o) {
    a11 += o.a11;
    a12 += o.a12;
    a22 += o.a22;
    return *this;
  }
  constexpr Sym2& operator-=(const Sym2& o) {
    a11 -= o.a11;
    a12 -= o.a12;
    a22 -= o.a22;
    return *this;
  }
  constexpr Sym2& operator*=(double s) {
    a11 *= s;
    a12 *= s;
    a22 *= s;
    return *this;
  }
  friend constexpr bool operator==(const Sym2&, const Sym2&) = default;
};

constexpr Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
constexpr Sym2 operator-(Sym2 a, const Sym2& b) { return a -= b; }
constexpr Sym2 operator*(Sym2 a, double s) { return a *= s; }
constexpr Sym2 operator*(double s, Sym2 a) { return a *= s; }

/// General (not necessarily symmetric) 2x2 matrix, row-major.
struct Mat2 {
  double m00 = 0.0, m01 = 0.0, m10 = 0.0, m11 = 0.0;

  static constexpr Mat2 from(const Sym2& s) { return {s.a11, s.a12, s.a12, s.a22}; }
  static constexpr Mat2 columns(const Point2& c0, const Point2& c1) {
    return {c0.x, c1.x, c0.y, c1.y};
  }
  [[nodiscard]] constexpr double det() const { return m00 * m11 - m01 * m10; }
  [[nodiscard]] constexpr Mat2 transpose() const { return {m00, m10, m01, m11}; }
  [[nodiscard]] Mat2 inverse() const;
  [[nodiscard]] constexpr Point2 apply(const Point2& v) const {
    return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
          a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

/// B^T S B, symmetric by construction.
Sym2 congruence(const Mat2& b, const Sym2& s);

/// Largest singular value of a general 2x2 matrix.
double norm2(const Mat2& m);

struct SymEigen {
  std::array<double, 2> values;    ///< ascending
  std::array<Point2, 2> vectors;   ///< orthonormal, vectors[i] pairs with values[i]
};

/// Closed-form eigendecomposition. Throws InvalidInput on non-finite entries.
SymEigen eig(const Sym2& a);

/// Rebuilds V diag(values) V^T.
Sym2 compose(const SymEigen& e);

/// Spectral norm, max |eigenvalue|.
double norm2(const Sym2& a);

/// Symmetric tensor whose eigenvalues are all strictly positive.
class Spd2 {
 public:
  /// Throws InvalidInput unless both eigenvalues are > 0.
  explicit Spd2(const Sym2& s);

  [[nodiscard]] const Sym2& sym() const noexcept { return s_; }
  operator const Sym2&() const noexcept { return s_; }  // NOLINT(google-explicit-constructor)

  [[nodiscard]] double a11() const noexcept { return s_.a11; }
  [[nodiscard]] double a12() const noexcept { return s_.a12; }
  [[nodiscard]] double a22() const noexcept { return s_.a22; }

 private:
  Sym2 s_;
};

[[nodiscard]] bool is_spd(const Sym2& s);

/// |H| + alpha I, i.e. sqrt(H^2) shifted on every eigendirection.
Spd2 abs_regularize(const Sym2& h, double alpha);

/// Metric intersection via simultaneous diagonalization; majorizes both A and B.
Spd2 intersect(const Spd2& a, const Spd2& b);

/// ((m0 n m1) n m2) n ... in list order.
Spd2 sequential_intersection(std::span<const Spd2> tensors);

}  // namespace anisoeig
