#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nugap/error.hpp"
#include "nugap/poly.hpp"

namespace nugap {

/// Shifts closer than this are considered the same delay.
inline constexpr double kShiftMergeTol = 1e-12;

/// Delay atom y -> coeff * exp(-i y shift).
struct Atom {
  double coeff = 0.0;
  double shift = 0.0;

  Complex eval(double y) const { return coeff * std::exp(Complex(0.0, -y * shift)); }
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Sup of |term|, of its first and of its second y-derivative over a y-interval.
struct TermBound {
  double sup_abs = 0.0;
  double lipschitz = 0.0;
  double curvature = 0.0;
};

namespace detail {

// distance from the root to the segment {iy : y in [a, b]}
inline double min_dist(const Complex& r, double a, double b) {
  const double dy = r.imag() < a ? a - r.imag() : (r.imag() > b ? r.imag() - b : 0.0);
  return std::hypot(r.real(), dy);
}

inline double max_dist(const Complex& r, double a, double b) {
  return std::hypot(r.real(), std::max(std::abs(r.imag() - a), std::abs(r.imag() - b)));
}

// bounds on |p|, |p'|, |p''| over |s| <= M from the coefficient moduli
struct PolyBounds {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline PolyBounds coeff_bounds(const Poly& p, double m) {
  PolyBounds b;
  double pw = 1.0;
  const auto& c = p.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k) {
    b.v += std::abs(c[k]) * pw;
    if (k + 1 < c.size()) b.d1 += static_cast<double>(k + 1) * std::abs(c[k + 1]) * pw;
    if (k + 2 < c.size()) b.d2 += static_cast<double>((k + 1) * (k + 2)) * std::abs(c[k + 2]) * pw;
    pw *= m;
  }
  return b;
}

}  // namespace detail

/// Shifted strictly proper rational y -> num(iy)/den(iy) * exp(-i y shift).
/// The denominator is kept monic and its roots are carried along so that
/// interval bounds never need a fresh root solve.
class RationalTerm {
 public:
  RationalTerm(Poly num, Poly den, double shift) : RationalTerm(std::move(num), std::move(den), shift, {}) {}

  RationalTerm(Poly num, Poly den, double shift, std::vector<Complex> den_roots)
      : num_(std::move(num)), den_(std::move(den)), shift_(shift), roots_(std::move(den_roots)) {
    if (den_.is_zero()) throw Error(ErrorCode::InvalidArgument, "rational term with zero denominator");
    if (!num_.is_zero() && num_.degree() >= den_.degree())
      throw Error(ErrorCode::NotProper, "rational term must be strictly proper");
    if (den_.lead() != 1.0) {
      const double f = 1.0 / den_.lead();
      num_ = num_.scaled(f);
      den_ = den_.scaled(f);
    }
    if (roots_.empty() && den_.degree() > 0) roots_ = roots(den_);
    for (const Complex& r : roots_)
      if (std::abs(r.real()) <= 1e-12 * std::max(1.0, std::abs(r)))
        throw Error(ErrorCode::AxisRoot, "rational term has a pole on the imaginary axis");
  }

  const Poly& num() const noexcept { return num_; }
  const Poly& den() const noexcept { return den_; }
  double shift() const noexcept { return shift_; }
  const std::vector<Complex>& den_roots() const noexcept { return roots_; }

  Complex rational_at(double y) const {
    const Complex s(0.0, y);
    return num_(s) / den_(s);
  }
  Complex eval(double y) const {
    const Complex r = rational_at(y);
    return shift_ == 0.0 ? r : r * std::exp(Complex(0.0, -y * shift_));
  }

  /// d/dy of eval(y).
  Complex derivative(double y) const {
    const Complex s(0.0, y);
    const Complex n = num_(s);
    const Complex d = den_(s);
    const Complex dn = num_.derivative()(s);
    const Complex dd = den_.derivative()(s);
    const Complex r = n / d;
    const Complex dr = Complex(0.0, 1.0) * (dn * d - n * dd) / (d * d);
    const Complex out = dr - Complex(0.0, shift_) * r;
    return shift_ == 0.0 ? out : out * std::exp(Complex(0.0, -y * shift_));
  }

  bool hurwitz() const {
    return std::all_of(roots_.begin(), roots_.end(), [](const Complex& r) { return r.real() < 0.0; });
  }

  double max_pole_modulus() const { return max_root_modulus(roots_); }

  /// Sup of |term|, |d/dy term| and |d2/dy2 term| over y in [a, b] (a <= b).
  TermBound bound_on(double a, double b) const {
    const double m = std::max(std::abs(a), std::abs(b));
    const detail::PolyBounds nb = detail::coeff_bounds(num_, m);
    const std::size_t k = roots_.size();
    std::vector<double> far(k);
    double inf_d = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      inf_d *= detail::min_dist(roots_[j], a, b);
      far[j] = detail::max_dist(roots_[j], a, b);
    }
    // |D'| and |D''| for monic D = prod (s - r_j)
    double sup_d1 = 0.0;
    double sup_d2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double p1 = 1.0;
      for (std::size_t l = 0; l < k; ++l)
        if (l != j) p1 *= far[l];
      sup_d1 += p1;
      for (std::size_t i = 0; i < k; ++i) {
        if (i == j) continue;
        double p2 = 1.0;
        for (std::size_t l = 0; l < k; ++l)
          if (l != j && l != i) p2 *= far[l];
        sup_d2 += p2;
      }
    }
    const double id = 1.0 / inf_d;
    TermBound tb;
    const double r0 = nb.v * id;
    const double r1 = nb.d1 * id + nb.v * sup_d1 * id * id;
    const double r2 = nb.d2 * id + 2.0 * nb.d1 * sup_d1 * id * id + nb.v * sup_d2 * id * id +
                      2.0 * nb.v * sup_d1 * sup_d1 * id * id * id;
    const double t = std::abs(shift_);
    tb.sup_abs = r0;
    tb.lipschitz = r1 + t * r0;
    tb.curvature = r2 + 2.0 * t * r1 + t * t * r0;
    return tb;
  }

  /// Bound on sup |term| over |y| >= big_y. Valid once big_y exceeds every
  /// pole modulus; returns +inf otherwise.
  double tail_bound(double big_y) const {
    double den_lb = 1.0;
    for (const Complex& r : roots_) {
      const double g = big_y - std::abs(r);
      if (g <= 0.0) return std::numeric_limits<double>::infinity();
      den_lb *= g;
    }
    const double num_ub = detail::coeff_bounds(num_, std::max(1.0, big_y)).v;
    return num_ub / den_lb;
  }

 private:
  Poly num_;
  Poly den_;
  double shift_;
  std::vector<Complex> roots_;
};

/// Element of the line algebra restricted to finitely many delay atoms plus
/// finitely many shifted strictly proper rational terms. Always canonical:
/// atoms sorted by shift with distinct shifts, terms merged on equal
/// (den, shift) and sorted.
class LineElement {
 public:
  LineElement() = default;
  LineElement(std::vector<Atom> atoms, std::vector<RationalTerm> terms)
      : atoms_(std::move(atoms)), terms_(std::move(terms)) {
    canonicalize();
  }

  static LineElement constant(double c) { return LineElement({Atom{c, 0.0}}, {}); }
  static LineElement atom(double c, double shift) { return LineElement({Atom{c, shift}}, {}); }
  static LineElement term(Poly num, Poly den, double shift = 0.0) {
    return LineElement({}, {RationalTerm(std::move(num), std::move(den), shift)});
  }

  /// Proper rational num/den times exp(-s shift): an equal-degree part is
  /// split off as a delay atom carrying the leading-coefficient ratio.
  static LineElement rational(const Poly& num, const Poly& den, double shift = 0.0,
                              std::vector<Complex> den_roots = {}) {
    if (num.is_zero()) return LineElement{};
    if (num.degree() > den.degree()) throw Error(ErrorCode::NotProper, "improper rational is not in the algebra");
    if (num.degree() < den.degree())
      return LineElement({}, {RationalTerm(num, den, shift, std::move(den_roots))});
    const double ratio = num.lead() / den.lead();
    if (den.degree() == 0) return LineElement::atom(ratio, shift);
    Poly rem = divmod(num, den).second;
    std::vector<RationalTerm> t;
    if (!rem.is_zero()) t.emplace_back(std::move(rem), den, shift, std::move(den_roots));
    return LineElement({Atom{ratio, shift}}, std::move(t));
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<RationalTerm>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return atoms_.empty() && terms_.empty(); }

  Complex eval(double y) const {
    Complex acc(0.0);
    for (const Atom& a : atoms_) acc += a.eval(y);
    for (const RationalTerm& t : terms_) acc += t.eval(y);
    return acc;
  }
  Complex operator()(double y) const { return eval(y); }

  Complex derivative(double y) const {
    Complex acc(0.0);
    for (const Atom& a : atoms_) acc += Complex(0.0, -a.shift) * a.eval(y);
    for (const RationalTerm& t : terms_) acc += t.derivative(y);
    return acc;
  }

  Complex ap_eval(double y) const {
    Complex acc(0.0);
    for (const Atom& a : atoms_) acc += a.eval(y);
    return acc;
  }
  Complex terms_eval(double y) const {
    Complex acc(0.0);
    for (const RationalTerm& t : terms_) acc += t.eval(y);
    return acc;
  }

  LineElement ap_part() const { return LineElement(atoms_, {}); }
  LineElement rational_part() const { return LineElement({}, terms_); }

  /// No delays anywhere: atoms (if any) and all terms sit at shift 0.
  bool delay_free() const {
    return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.shift == 0.0; }) &&
           std::all_of(terms_.begin(), terms_.end(), [](const RationalTerm& t) { return t.shift() == 0.0; });
  }

  double max_pole_modulus() const {
    double m = 0.0;
    for (const RationalTerm& t : terms_) m = std::max(m, t.max_pole_modulus());
    return m;
  }

  double atom_l1() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += std::abs(a.coeff);
    return s;
  }
  double atom_lipschitz() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += std::abs(a.coeff * a.shift);
    return s;
  }
  double atom_curvature() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += std::abs(a.coeff) * a.shift * a.shift;
    return s;
  }

  /// Involution F*(iy) = conj(F(iy)).
  LineElement star() const {
    std::vector<Atom> a;
    a.reserve(atoms_.size());
    for (const Atom& x : atoms_) a.push_back({x.coeff, x.shift == 0.0 ? 0.0 : -x.shift});
    std::vector<RationalTerm> t;
    t.reserve(terms_.size());
    for (const RationalTerm& x : terms_) {
      std::vector<Complex> r;
      r.reserve(x.den_roots().size());
      for (const Complex& z : x.den_roots()) r.push_back(-z);
      // den(-s) has leading coefficient (-1)^deg; the term ctor rescales to monic
      t.emplace_back(x.num().reflect(), x.den().reflect(), x.shift() == 0.0 ? 0.0 : -x.shift(), std::move(r));
    }
    return LineElement(std::move(a), std::move(t));
  }

  LineElement scaled(double f) const {
    if (f == 0.0) return LineElement{};
    std::vector<Atom> a(atoms_);
    for (Atom& x : a) x.coeff *= f;
    std::vector<RationalTerm> t;
    t.reserve(terms_.size());
    for (const RationalTerm& x : terms_) t.emplace_back(x.num().scaled(f), x.den(), x.shift(), x.den_roots());
    return LineElement(std::move(a), std::move(t));
  }

  LineElement operator-() const { return scaled(-1.0); }

  friend LineElement operator+(const LineElement& f, const LineElement& g) {
    std::vector<Atom> a(f.atoms_);
    a.insert(a.end(), g.atoms_.begin(), g.atoms_.end());
    std::vector<RationalTerm> t(f.terms_);
    t.insert(t.end(), g.terms_.begin(), g.terms_.end());
    return LineElement(std::move(a), std::move(t));
  }
  friend LineElement operator-(const LineElement& f, const LineElement& g) { return f + (-g); }

  friend LineElement operator*(const LineElement& f, const LineElement& g) {
    std::vector<Atom> atoms;
    std::vector<RationalTerm> terms;
    for (const Atom& x : f.atoms_)
      for (const Atom& y : g.atoms_) atoms.push_back({x.coeff * y.coeff, x.shift + y.shift});
    auto atom_term = [&terms](const Atom& x, const RationalTerm& t) {
      terms.emplace_back(t.num().scaled(x.coeff), t.den(), x.shift + t.shift(), t.den_roots());
    };
    for (const Atom& x : f.atoms_)
      for (const RationalTerm& t : g.terms_) atom_term(x, t);
    for (const Atom& x : g.atoms_)
      for (const RationalTerm& t : f.terms_) atom_term(x, t);
    for (const RationalTerm& s : f.terms_) {
      for (const RationalTerm& t : g.terms_) {
        // keep the root list in the same canonical order as the den product
        const bool swap = Poly::canonical_less(t.den(), s.den());
        const RationalTerm& p = swap ? t : s;
        const RationalTerm& q = swap ? s : t;
        std::vector<Complex> r(p.den_roots());
        r.insert(r.end(), q.den_roots().begin(), q.den_roots().end());
        LineElement prod = rational(s.num() * t.num(), s.den() * t.den(), s.shift() + t.shift(), std::move(r));
        atoms.insert(atoms.end(), prod.atoms_.begin(), prod.atoms_.end());
        terms.insert(terms.end(), prod.terms_.begin(), prod.terms_.end());
      }
    }
    return LineElement(std::move(atoms), std::move(terms));
  }

  /// Upper bound on the algebra norm: sum of |atom coefficients| plus, per
  /// term, the triangle-inequality bound on the L1 norm of its inverse
  /// transform obtained from partial fractions.
  double norm_upper_bound() const;

 private:
  static double shift_key(double s) { return s == 0.0 ? 0.0 : s; }

  template <typename T, typename Pred>
  static void cancel_pairs(std::vector<T>& v, Pred negates) {
    std::vector<bool> gone(v.size(), false);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (gone[i]) continue;
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        if (!gone[j] && negates(v[i], v[j])) {
          gone[i] = gone[j] = true;
          break;
        }
      }
    }
    std::vector<T> keep;
    keep.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!gone[i]) keep.push_back(std::move(v[i]));
    v = std::move(keep);
  }

  void canonicalize() {
    // exact negation pairs cancel first so structural identities hold bitwise
    cancel_pairs(atoms_, [](const Atom& a, const Atom& b) {
      return a.coeff == -b.coeff && std::abs(a.shift - b.shift) < kShiftMergeTol;
    });
    cancel_pairs(terms_, [](const RationalTerm& a, const RationalTerm& b) {
      return std::abs(a.shift() - b.shift()) < kShiftMergeTol && a.den() == b.den() && a.num() == -b.num();
    });
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.shift < b.shift; });
    std::vector<Atom> merged;
    for (const Atom& a : atoms_) {
      if (!merged.empty() && std::abs(merged.back().shift - a.shift) < kShiftMergeTol)
        merged.back().coeff += a.coeff;
      else
        merged.push_back(a);
    }
    double amax = 0.0;
    for (const Atom& a : merged) amax = std::max(amax, std::abs(a.coeff));
    std::erase_if(merged, [amax](const Atom& a) { return a.coeff == 0.0 || std::abs(a.coeff) < 1e-15 * amax; });
    for (Atom& a : merged) a.shift = shift_key(a.shift);
    atoms_ = std::move(merged);

    std::sort(terms_.begin(), terms_.end(), [](const RationalTerm& a, const RationalTerm& b) {
      if (a.shift() != b.shift()) return a.shift() < b.shift();
      if (a.den() != b.den()) return Poly::canonical_less(a.den(), b.den());
      return Poly::canonical_less(a.num(), b.num());
    });
    std::vector<RationalTerm> mt;
    std::size_t i = 0;
    while (i < terms_.size()) {
      std::size_t j = i + 1;
      while (j < terms_.size() && std::abs(terms_[j].shift() - terms_[i].shift()) < kShiftMergeTol) ++j;
      mt.push_back(merge_group(std::span<const RationalTerm>(terms_.data() + i, j - i)));
      i = j;
    }
    std::erase_if(mt, [](const RationalTerm& t) {
      return t.num().is_zero() || t.num().max_abs() <= 1e-15 * t.den().max_abs();
    });
    terms_ = std::move(mt);
  }

  static bool same_root(const Complex& a, const Complex& b) {
    return std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a));
  }

  // One term over the least common denominator of a same-shift group; the
  // denominator is assembled from the carried roots.
  static RationalTerm merge_group(std::span<const RationalTerm> g) {
    bool same_den = true;
    for (const RationalTerm& t : g) same_den = same_den && Poly::approx_equal(t.den(), g.front().den(), 1e-12);
    if (same_den) {
      Poly num = g.front().num();
      for (std::size_t k = 1; k < g.size(); ++k) num = num + g[k].num();
      return RationalTerm(std::move(num), g.front().den(), g.front().shift(), g.front().den_roots());
    }
    std::vector<Complex> lcm;
    for (const RationalTerm& t : g) {
      std::vector<bool> used(lcm.size(), false);
      for (const Complex& r : t.den_roots()) {
        bool hit = false;
        for (std::size_t k = 0; k < lcm.size(); ++k) {
          if (!used[k] && same_root(lcm[k], r)) {
            used[k] = hit = true;
            break;
          }
        }
        if (!hit) {
          lcm.push_back(r);
          used.push_back(true);
        }
      }
    }
    Poly num;
    for (const RationalTerm& t : g) {
      std::vector<bool> used(lcm.size(), false);
      for (const Complex& r : t.den_roots()) {
        for (std::size_t k = 0; k < lcm.size(); ++k) {
          if (!used[k] && same_root(lcm[k], r)) {
            used[k] = true;
            break;
          }
        }
      }
      std::vector<Complex> rest;
      for (std::size_t k = 0; k < lcm.size(); ++k)
        if (!used[k]) rest.push_back(lcm[k]);
      num = num + t.num() * poly_from_roots(rest);
    }
    std::sort(lcm.begin(), lcm.end(), [](const Complex& a, const Complex& b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    Poly den = poly_from_roots(lcm);
    return RationalTerm(std::move(num), std::move(den), g.front().shift(), std::move(lcm));
  }

  std::vector<Atom> atoms_;
  std::vector<RationalTerm> terms_;
};

namespace detail {

// Partial fraction coefficients r_{p,k} of num/den = sum r_{p,k} / (s - p)^k,
// with den roots clustered to account for multiplicity.
struct PartialFraction {
  Complex pole;
  int order;
  Complex residue;
};

inline std::vector<PartialFraction> partial_fractions(const RationalTerm& t) {
  std::vector<std::pair<Complex, int>> clusters;
  for (const Complex& r : t.den_roots()) {
    bool found = false;
    for (auto& [c, m] : clusters) {
      if (std::abs(c - r) <= 1e-6 * std::max(1.0, std::abs(r))) {
        ++m;
        found = true;
        break;
      }
    }
    if (!found) clusters.emplace_back(r, 1);
  }
  const int n = t.den().degree();
  // basis polynomials den / (s - p)^k in coefficient form
  std::vector<PartialFraction> pf;
  Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(n, n);
  int col = 0;
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    for (int k = 1; k <= clusters[ci].second; ++k) {
      std::vector<Complex> c{Complex(1.0)};
      auto mult = [&c](const Complex& root) {
        std::vector<Complex> nc(c.size() + 1, Complex(0.0));
        for (std::size_t i = 0; i < c.size(); ++i) {
          nc[i + 1] += c[i];
          nc[i] -= root * c[i];
        }
        c = std::move(nc);
      };
      for (std::size_t cj = 0; cj < clusters.size(); ++cj) {
        const int reps = cj == ci ? clusters[cj].second - k : clusters[cj].second;
        for (int r = 0; r < reps; ++r) mult(clusters[cj].first);
      }
      for (std::size_t i = 0; i < c.size() && static_cast<int>(i) < n; ++i) basis(static_cast<int>(i), col) = c[i];
      pf.push_back({clusters[ci].first, k, Complex(0.0)});
      ++col;
    }
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < n; ++i) rhs(i) = t.num()[static_cast<std::size_t>(i)];
  Eigen::VectorXcd sol = basis.fullPivLu().solve(rhs);
  for (int i = 0; i < n; ++i) pf[static_cast<std::size_t>(i)].residue = sol(i);
  return pf;
}

}  // namespace detail

inline double LineElement::norm_upper_bound() const {
  double total = atom_l1();
  for (const RationalTerm& t : terms_) {
    for (const auto& f : detail::partial_fractions(t)) {
      // integral of |t^(k-1)/(k-1)! e^(p t)| over a half line is 1/|Re p|^k
      total += std::abs(f.residue) / std::pow(std::abs(f.pole.real()), f.order);
    }
  }
  return total;
}

/// Element of the half-line subalgebra: delays >= 0 and Hurwitz term
/// denominators. Checked on construction; closed under + and *.
class PlusElement {
 public:
  PlusElement() = default;
  explicit PlusElement(LineElement e) : e_(std::move(e)) { validate(); }

  const LineElement& line() const noexcept { return e_; }
  operator const LineElement&() const noexcept { return e_; }  // NOLINT(google-explicit-constructor)

  Complex eval(double y) const { return e_.eval(y); }
  const std::vector<Atom>& atoms() const noexcept { return e_.atoms(); }
  const std::vector<RationalTerm>& terms() const noexcept { return e_.terms(); }

  friend PlusElement operator+(const PlusElement& a, const PlusElement& b) { return PlusElement(a.e_ + b.e_); }
  friend PlusElement operator-(const PlusElement& a, const PlusElement& b) { return PlusElement(a.e_ - b.e_); }
  friend PlusElement operator*(const PlusElement& a, const PlusElement& b) { return PlusElement(a.e_ * b.e_); }
  PlusElement operator-() const { return PlusElement(-e_); }
  PlusElement scaled(double f) const { return PlusElement(e_.scaled(f)); }

  static bool admissible(const LineElement& e) {
    for (const Atom& a : e.atoms())
      if (a.shift < -kShiftMergeTol) return false;
    for (const RationalTerm& t : e.terms())
      if (t.shift() < -kShiftMergeTol || !t.hurwitz()) return false;
    return true;
  }

 private:
  void validate() const {
    if (!admissible(e_)) throw Error(ErrorCode::InvalidArgument, "element is not in the half-line algebra");
  }

  LineElement e_;
};

}  // namespace nugap
