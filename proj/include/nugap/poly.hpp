#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nugap/error.hpp"

namespace nugap {

using Complex = std::complex<double>;

/// Real polynomial with ascending coefficients: coeffs()[k] multiplies s^k.
/// Trailing zeros are stripped on construction, so degree() is the index of
/// the last nonzero coefficient (the zero polynomial is {0} with degree 0).
class Poly {
 public:
  Poly() : c_{0.0} {}
  Poly(std::initializer_list<double> c) : c_(c) { trim(); }
  explicit Poly(std::vector<double> c) : c_(std::move(c)) { trim(); }

  static Poly constant(double v) { return Poly(std::vector<double>{v}); }
  /// s - root for real root
  static Poly linear(double root) { return Poly({-root, 1.0}); }

  const std::vector<double>& coeffs() const noexcept { return c_; }
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  double lead() const noexcept { return c_.back(); }
  double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
  bool is_zero() const noexcept { return c_.size() == 1 && c_[0] == 0.0; }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  template <typename T>
  T eval(const T& s) const {
    T acc = T(c_.back());
    for (int k = degree() - 1; k >= 0; --k) acc = acc * s + T(c_[static_cast<std::size_t>(k)]);
    return acc;
  }
  Complex operator()(Complex s) const { return eval(s); }

  /// p(-s)
  Poly reflect() const {
    std::vector<double> r(c_);
    for (std::size_t k = 1; k < r.size(); k += 2) r[k] = -r[k];
    return Poly(std::move(r));
  }

  Poly derivative() const {
    if (c_.size() == 1) return Poly{};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Poly(std::move(d));
  }

  Poly scaled(double f) const {
    std::vector<double> r(c_);
    for (double& v : r) v *= f;
    return Poly(std::move(r));
  }

  Poly operator-() const { return scaled(-1.0); }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] += b.c_[k];
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

  /// Product with operands put in a canonical order first, so that a*b and
  /// b*a are bitwise identical (structural cancellations rely on this).
  friend Poly operator*(const Poly& a, const Poly& b) {
    const Poly* x = &a;
    const Poly* y = &b;
    if (canonical_less(b, a)) std::swap(x, y);
    std::vector<double> r(x->c_.size() + y->c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < x->c_.size(); ++i)
      for (std::size_t j = 0; j < y->c_.size(); ++j) r[i + j] += x->c_[i] * y->c_[j];
    return Poly(std::move(r));
  }

  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

  /// Total order used for canonical forms: degree first, then coefficients.
  static bool canonical_less(const Poly& a, const Poly& b) {
    if (a.c_.size() != b.c_.size()) return a.c_.size() < b.c_.size();
    return std::lexicographical_compare(a.c_.rbegin(), a.c_.rend(), b.c_.rbegin(), b.c_.rend());
  }

  /// Coefficient-wise closeness relative to the larger coefficient scale.
  static bool approx_equal(const Poly& a, const Poly& b, double rel) {
    if (a.degree() != b.degree()) return false;
    const double scale = std::max({1e-300, a.max_abs(), b.max_abs()});
    for (std::size_t k = 0; k < a.c_.size(); ++k)
      if (std::abs(a.c_[k] - b.c_[k]) > rel * scale) return false;
    return true;
  }

 private:
  void trim() {
    if (c_.empty()) c_.push_back(0.0);
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  }

  std::vector<double> c_;
};

/// Quotient and remainder with deg(rem) < deg(den) enforced exactly.
inline std::pair<Poly, Poly> divmod(const Poly& num, const Poly& den) {
  if (den.is_zero()) throw Error(ErrorCode::InvalidArgument, "division by zero polynomial");
  const int dn = num.degree();
  const int dd = den.degree();
  if (dn < dd) return {Poly{}, num};
  std::vector<double> r(num.coeffs());
  std::vector<double> q(static_cast<std::size_t>(dn - dd + 1), 0.0);
  for (int k = dn - dd; k >= 0; --k) {
    const double f = r[static_cast<std::size_t>(k + dd)] / den.lead();
    q[static_cast<std::size_t>(k)] = f;
    for (int j = 0; j <= dd; ++j) r[static_cast<std::size_t>(k + j)] -= f * den[static_cast<std::size_t>(j)];
    r[static_cast<std::size_t>(k + dd)] = 0.0;
  }
  r.resize(static_cast<std::size_t>(std::max(dd, 1)));
  return {Poly(std::move(q)), Poly(std::move(r))};
}

/// Monic polynomial with the given roots; complex roots must come in
/// conjugate pairs, imaginary residue of the expansion is discarded.
inline Poly poly_from_roots(std::span<const Complex> roots, double lead = 1.0) {
  std::vector<Complex> c{Complex(1.0)};
  for (const Complex& r : roots) {
    std::vector<Complex> n(c.size() + 1, Complex(0.0));
    for (std::size_t k = 0; k < c.size(); ++k) {
      n[k + 1] += c[k];
      n[k] -= r * c[k];
    }
    c = std::move(n);
  }
  std::vector<double> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) out[k] = lead * c[k].real();
  return Poly(std::move(out));
}

/// Roots by companion-matrix eigenvalues followed by a Newton polish pass.
inline std::vector<Complex> roots(const Poly& p) {
  const int n = p.degree();
  if (n <= 0) return {};
  if (n == 1) return {Complex(-p[0] / p[1])};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[static_cast<std::size_t>(i)] / p.lead();
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::RootFail, "companion eigenvalue solver did not converge");
  const Poly dp = p.derivative();
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Complex z = es.eigenvalues()[i];
    Complex fz = p(z);
    for (int it = 0; it < 3; ++it) {
      const Complex d = dp(z);
      if (std::abs(d) == 0.0) break;
      const Complex zn = z - fz / d;
      const Complex fn = p(zn);
      if (!(std::abs(fn) < std::abs(fz))) break;
      z = zn;
      fz = fn;
    }
    // keep real roots exactly real
    if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) z = Complex(z.real(), 0.0);
    out.push_back(z);
  }
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

inline double max_root_modulus(std::span<const Complex> rs) {
  double m = 0.0;
  for (const Complex& r : rs) m = std::max(m, std::abs(r));
  return m;
}

/// True when p and q share a root within tol (relative to root scale).
inline bool have_common_root(const Poly& p, const Poly& q, double tol = 1e-8) {
  if (p.degree() < 1 || q.degree() < 1) return false;
  const auto rp = roots(p);
  const auto rq = roots(q);
  for (const Complex& a : rp)
    for (const Complex& b : rq)
      if (std::abs(a - b) <= tol * std::max(1.0, std::abs(a))) return true;
  return false;
}

}  // namespace nugap
