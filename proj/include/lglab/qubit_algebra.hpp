#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "errors.hpp"

namespace lglab {

using Complex = std::complex<double>;

namespace detail {
// Plain complex product; std::complex operator* goes through the Annex G
// NaN-recovery path, which dominates the cost of the 2x2 kernels.
constexpr Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
}  // namespace detail

/// 2x2 complex matrix, row-major. Carrier for density matrices, effects,
/// Kraus operators and unitaries.
class Mat2 {
 public:
  constexpr Mat2() = default;
  constexpr Mat2(Complex a00, Complex a01, Complex a10, Complex a11) : m_{a00, a01, a10, a11} {}

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 zero() { return {}; }
  static constexpr Mat2 diag(Complex a, Complex b) { return {a, 0.0, 0.0, b}; }

  constexpr Complex operator()(int row, int col) const { return m_[2 * row + col]; }
  constexpr Complex& operator()(int row, int col) { return m_[2 * row + col]; }

  constexpr Mat2& operator+=(const Mat2& o) {
    for (int i = 0; i < 4; ++i) m_[i] += o.m_[i];
    return *this;
  }
  constexpr Mat2& operator-=(const Mat2& o) {
    for (int i = 0; i < 4; ++i) m_[i] -= o.m_[i];
    return *this;
  }
  constexpr Mat2& operator*=(Complex s) {
    for (auto& x : m_) x = detail::cmul(x, s);
    return *this;
  }

  friend constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend constexpr Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
  friend constexpr Mat2 operator*(Complex s, Mat2 a) { return a *= s; }
  friend constexpr Mat2 operator*(Mat2 a, Complex s) { return a *= s; }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;

 private:
  std::array<Complex, 4> m_{};
};

namespace pauli {
inline constexpr Mat2 x{0.0, 1.0, 1.0, 0.0};
inline constexpr Mat2 y{0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0};
inline constexpr Mat2 z{1.0, 0.0, 0.0, -1.0};
}  // namespace pauli

constexpr Mat2 mat_mul(const Mat2& a, const Mat2& b) {
  using detail::cmul;
  return {cmul(a(0, 0), b(0, 0)) + cmul(a(0, 1), b(1, 0)), cmul(a(0, 0), b(0, 1)) + cmul(a(0, 1), b(1, 1)),
          cmul(a(1, 0), b(0, 0)) + cmul(a(1, 1), b(1, 0)), cmul(a(1, 0), b(0, 1)) + cmul(a(1, 1), b(1, 1))};
}

constexpr Mat2 operator*(const Mat2& a, const Mat2& b) { return mat_mul(a, b); }

constexpr Mat2 adjoint(const Mat2& a) {
  return {std::conj(a(0, 0)), std::conj(a(1, 0)), std::conj(a(0, 1)), std::conj(a(1, 1))};
}

constexpr Complex trace(const Mat2& a) { return a(0, 0) + a(1, 1); }

constexpr Complex det(const Mat2& a) { return detail::cmul(a(0, 0), a(1, 1)) - detail::cmul(a(0, 1), a(1, 0)); }

/// Real part of tr(a*b) without forming the product.
constexpr double trace_product_re(const Mat2& a, const Mat2& b) {
  using detail::cmul;
  return (cmul(a(0, 0), b(0, 0)) + cmul(a(0, 1), b(1, 0)) + cmul(a(1, 0), b(0, 1)) + cmul(a(1, 1), b(1, 1)))
      .real();
}

/// k * rho * k^dagger
constexpr Mat2 conjugate(const Mat2& k, const Mat2& rho) { return k * rho * adjoint(k); }

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
  double m = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m = std::max(m, std::abs(a(r, c) - b(r, c)));
  return m;
}

inline bool is_hermitian(const Mat2& a, double tol = 1e-12) { return max_abs_diff(a, adjoint(a)) <= tol; }

/// Eigen-decomposition of a hermitian matrix. Eigenvalues ascending; the
/// columns of `vectors` are the matching orthonormal eigenvectors.
struct HermitianEigen {
  std::array<double, 2> values{};
  Mat2 vectors = Mat2::identity();
};

inline HermitianEigen eigh(const Mat2& a) {
  const double p = a(0, 0).real();
  const double q = a(1, 1).real();
  const Complex b = 0.5 * (a(0, 1) + std::conj(a(1, 0)));
  const double mean = 0.5 * (p + q);
  const double half_gap = 0.5 * (p - q);
  const double radius = std::hypot(half_gap, std::abs(b));

  HermitianEigen out;
  out.values = {mean - radius, mean + radius};
  if (std::abs(b) <= 1e-300) {
    if (p <= q) {
      out.vectors = Mat2::identity();
    } else {
      out.vectors = Mat2{0.0, 1.0, 1.0, 0.0};
    }
    return out;
  }
  // Rotation angle of the traceless part; stable for nearly degenerate input.
  const double t = std::atan2(std::abs(b), half_gap);
  const double c = std::cos(0.5 * t);
  const double s = std::sin(0.5 * t);
  const Complex phase = b / std::abs(b);
  out.vectors = Mat2{-phase * s, Complex{c, 0.0}, Complex{c, 0.0}, std::conj(phase) * s};
  return out;
}

inline double min_eigenvalue(const Mat2& a) { return eigh(a).values[0]; }

/// V diag(f(lambda)) V^dagger for a hermitian input.
template <class F>
Mat2 hermitian_function(const HermitianEigen& e, F&& f) {
  const Mat2 d = Mat2::diag(f(e.values[0]), f(e.values[1]));
  return e.vectors * d * adjoint(e.vectors);
}

inline constexpr double kPsdClampTolerance = 1e-10;

/// Principal square root of a hermitian positive-semidefinite matrix.
///
/// Uses the closed 2x2 identity sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)),
/// falling back to the eigendecomposition when the denominator vanishes.
/// Eigenvalues down to -1e-10 are clamped to zero; anything lower throws NotPsd.
inline Mat2 psd_sqrt(const Mat2& a) {
  const HermitianEigen e = eigh(a);
  if (e.values[0] < -kPsdClampTolerance) {
    throw NotPsd("psd_sqrt: eigenvalue " + std::to_string(e.values[0]) + " is below -1e-10");
  }
  const double l0 = std::max(e.values[0], 0.0);
  const double l1 = std::max(e.values[1], 0.0);
  const double root_det = std::sqrt(l0 * l1);
  const double denom_sq = l0 + l1 + 2.0 * root_det;
  if (std::sqrt(denom_sq) >= 1e-12 && e.values[0] >= 0.0) {
    const double t = std::sqrt(denom_sq);
    Mat2 r = a + Mat2::diag(root_det, root_det);
    return r * Complex{1.0 / t, 0.0};
  }
  return hermitian_function(e, [](double l) { return std::sqrt(std::max(l, 0.0)); });
}

}  // namespace lglab
