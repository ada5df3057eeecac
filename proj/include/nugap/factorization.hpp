#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "nugap/element.hpp"
#include "nugap/error.hpp"
#include "nugap/poly.hpp"

namespace nugap {

/// p(s) = exp(-s tau) b(s) / a(s).
struct PlantDesc {
  double tau = 0.0;
  Poly num{0.0};  // b
  Poly den{1.0};  // a
  std::string name;

  /// Throws NEGATIVE_DELAY, NOT_PROPER or COMMON_ROOTS.
  void validate() const {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::NegativeDelay, "delay must be finite and >= 0");
    if (den.is_zero()) throw Error(ErrorCode::NotProper, "denominator is identically zero");
    if (num.degree() > den.degree() && !num.is_zero())
      throw Error(ErrorCode::NotProper, "numerator degree exceeds denominator degree");
    if (num.is_zero()) {
      if (den.degree() > 0) throw Error(ErrorCode::CommonRoots, "zero plant must have a constant denominator");
      return;
    }
    if (have_common_root(num, den, 1e-8)) throw Error(ErrorCode::CommonRoots, "numerator and denominator share a root");
  }

  Complex eval(double y) const {
    const Complex s(0.0, y);
    return std::exp(-s * tau) * num(s) / den(s);
  }

  friend bool operator==(const PlantDesc& a, const PlantDesc& b) {
    return a.tau == b.tau && a.num == b.num && a.den == b.den && a.name == b.name;
  }
};

/// Normalized coprime pair p = n / d with n*n + d*d = 1.
struct CoprimeFactors {
  PlusElement n;
  PlusElement d;
  Poly chi;
  std::vector<Complex> chi_roots;
};

/// Hurwitz chi with chi(s) chi(-s) = a(s) a(-s) + b(s) b(-s) and positive
/// leading coefficient. Works in u = s^2 so each root pair is split once.
inline Poly spectral_factor(const Poly& a, const Poly& b, std::vector<Complex>* chi_roots = nullptr) {
  if (b.degree() > a.degree() && !b.is_zero()) throw Error(ErrorCode::NotProper, "deg b > deg a");
  const int n = a.degree();
  const double an = a[static_cast<std::size_t>(n)];
  const double bn = b[static_cast<std::size_t>(n)];
  const double c = std::sqrt(an * an + bn * bn);
  if (n == 0) {
    if (chi_roots) chi_roots->clear();
    return Poly::constant(c);
  }
  const Poly e = a * a.reflect() + b * b.reflect();  // even in s
  std::vector<double> eu(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) eu[static_cast<std::size_t>(k)] = e[static_cast<std::size_t>(2 * k)];
  const Poly eu_poly(std::move(eu));
  if (eu_poly.degree() != n) throw Error(ErrorCode::RootFail, "degenerate spectral polynomial");
  std::vector<Complex> r;
  r.reserve(static_cast<std::size_t>(n));
  for (const Complex& u : roots(eu_poly)) {
    const Complex z = -std::sqrt(u);
    if (std::abs(z.real()) <= 1e-8) throw Error(ErrorCode::AxisRoot, "spectral polynomial has a root on the imaginary axis");
    r.push_back(z);
  }
  Poly chi = poly_from_roots(r, c);
  if (chi_roots) *chi_roots = std::move(r);
  return chi;
}

inline CoprimeFactors ncf(const PlantDesc& p) {
  p.validate();
  CoprimeFactors f;
  f.chi = spectral_factor(p.den, p.num, &f.chi_roots);
  f.d = PlusElement(LineElement::rational(p.den, f.chi, 0.0, f.chi_roots));
  f.n = PlusElement(LineElement::rational(p.num, f.chi, p.tau, f.chi_roots));
  return f;
}

/// G = (n, d) and its annihilator G~ = (-d, n).
struct GraphSymbols {
  std::pair<LineElement, LineElement> g;
  std::pair<LineElement, LineElement> g_tilde;
};

inline GraphSymbols graph_symbols(const CoprimeFactors& f) {
  return {{f.n.line(), f.d.line()}, {-f.d.line(), f.n.line()}};
}

/// Row times column: (r1, r2) . (c1, c2).
inline LineElement dot(const std::pair<LineElement, LineElement>& row, const std::pair<LineElement, LineElement>& col) {
  return row.first * col.first + row.second * col.second;
}

}  // namespace nugap
