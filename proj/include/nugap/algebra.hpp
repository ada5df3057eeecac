#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "nugap/branch_bound.hpp"
#include "nugap/element.hpp"
#include "nugap/error.hpp"

namespace nugap {

/// Settings for certified frequency sweeps.
struct GridConfig {
  double tol = 1e-6;                   // absolute accuracy of sup/inf values
  double ymax_hint = 0.0;              // initial half-width of the sweep; 0 = automatic
  std::size_t budget = 4'000'000;      // evaluation budget per sweep
  double resolution = 1e-10;           // moduli below this count as zeros
  double ap_floor = 1e-9;              // lower bounds below this are UNCERTAIN for >= 3 atoms
};

/// Result of a sup-norm sweep.
struct SupResult {
  double value = 0.0;      // attained (or approached) supremum, a lower bound on the truth
  double argmax = 0.0;     // frequency of the sup; +inf if only approached as |y| -> inf
  double certified = 0.0;  // rigorous upper bound, certified - value <= tol
  std::size_t evals = 0;
};

struct InfResult {
  double value = 0.0;      // best sampled infimum
  double argmin = 0.0;
  double certified = 0.0;  // rigorous lower bound
  std::size_t evals = 0;
};

struct InvertCert {
  bool invertible = false;
  double ap_floor = 0.0;
  double line_floor = 0.0;
};

/// Two-sided enclosure of an almost-periodic extremum.
struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

namespace detail {

/// Common quantum q with every shift offset (t_k - t_min) = n_k q, n_k <= max_n.
struct Commensurate {
  double quantum = 0.0;
  std::vector<long> multiples;
};

inline std::optional<Commensurate> commensurate(std::span<const Atom> atoms, long max_n = 4096) {
  if (atoms.size() < 2) return std::nullopt;
  const double t0 = atoms.front().shift;
  const double span = atoms.back().shift - t0;
  if (span <= 0.0) return std::nullopt;
  for (long n = 1; n <= max_n; ++n) {
    const double q = span / static_cast<double>(n);
    bool ok = true;
    std::vector<long> mult;
    for (const Atom& a : atoms) {
      const double r = (a.shift - t0) / q;
      const double rr = std::round(r);
      if (std::abs(r - rr) > 1e-9 * std::max(1.0, r)) {
        ok = false;
        break;
      }
      mult.push_back(static_cast<long>(rr));
    }
    if (ok) return Commensurate{q, std::move(mult)};
  }
  return std::nullopt;
}

inline double ap_abs(std::span<const Atom> atoms, double y) {
  Complex acc(0.0);
  for (const Atom& a : atoms) acc += a.eval(y);
  return std::abs(acc);
}

inline double ap_lipschitz_rel(std::span<const Atom> atoms) {
  // the common phase exp(-i y t_min) does not change the modulus
  double l = 0.0;
  const double t0 = atoms.empty() ? 0.0 : atoms.front().shift;
  for (const Atom& a : atoms) l += std::abs(a.coeff * (a.shift - t0));
  return l;
}

inline std::vector<double> uniform_edges(double lo, double hi, int n) {
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) e[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n;
  return e;
}

}  // namespace detail

/// Enclosure of sup_y |sum c_k exp(-i y t_k)|. Exact for <= 2 atoms and for
/// commensurate shifts (certified sweep over one period); otherwise the
/// upper end is the Kronecker value sum |c_k|.
inline Bracket ap_sup(std::span<const Atom> atoms, const GridConfig& cfg = {}) {
  if (atoms.empty()) return {0.0, 0.0};
  double l1 = 0.0;
  for (const Atom& a : atoms) l1 += std::abs(a.coeff);
  if (atoms.size() <= 2) return {l1, l1};
  const double lip = detail::ap_lipschitz_rel(atoms);
  auto val = [&](double y) { return detail::ap_abs(atoms, y); };
  auto up = [&](double a, double b, double v) { return std::min(l1, v + 0.5 * lip * (b - a)); };
  if (auto c = detail::commensurate(atoms)) {
    const double period = 2.0 * std::numbers::pi / c->quantum;
    auto r = bb::maximize(val, up, detail::uniform_edges(0.0, period, 64), cfg.tol, cfg.budget, 0.0, 0.0);
    return {r.value, r.certified};
  }
  double lo = 0.0;
  const double span = atoms.back().shift - atoms.front().shift;
  const double step = 0.05 / std::max(span, 1e-12);
  for (int i = 0; i < 200000; ++i) lo = std::max(lo, val(i * step));
  return {lo, l1};
}

/// Enclosure of inf_y |sum c_k exp(-i y t_k)|.
inline Bracket ap_inf(std::span<const Atom> atoms, const GridConfig& cfg = {}) {
  if (atoms.empty()) return {0.0, 0.0};
  if (atoms.size() == 1) return {std::abs(atoms[0].coeff), std::abs(atoms[0].coeff)};
  if (atoms.size() == 2) {
    const double v = std::abs(std::abs(atoms[0].coeff) - std::abs(atoms[1].coeff));
    return {v, v};
  }
  double l1 = 0.0;
  double cmax = 0.0;
  for (const Atom& a : atoms) {
    l1 += std::abs(a.coeff);
    cmax = std::max(cmax, std::abs(a.coeff));
  }
  const double polygon = std::max(0.0, 2.0 * cmax - l1);
  const double lip = detail::ap_lipschitz_rel(atoms);
  auto val = [&](double y) { return detail::ap_abs(atoms, y); };
  if (auto c = detail::commensurate(atoms)) {
    const double period = 2.0 * std::numbers::pi / c->quantum;
    auto low = [&](double a, double b, double v) { return std::max(polygon, v - 0.5 * lip * (b - a)); };
    auto gap = [&](double best) { return std::max(cfg.tol * 1e-3, 1e-7 * best); };
    auto r = bb::minimize(val, low, detail::uniform_edges(0.0, period, 64), gap, cfg.budget, l1, 0.0);
    return {std::max(0.0, r.certified), r.value};
  }
  double hi = l1;
  const double span = atoms.back().shift - atoms.front().shift;
  const double step = 0.05 / std::max(span, 1e-12);
  for (int i = 0; i < 200000; ++i) hi = std::min(hi, val(i * step));
  return {polygon, hi};
}

/// inf over y of |F_AP(iy)| as a certified lower bound. Closed forms for one
/// and two atoms; a period sweep or the polygon bound beyond that.
inline double ap_min_modulus(std::span<const Atom> atoms, const GridConfig& cfg = {}) {
  const Bracket b = ap_inf(atoms, cfg);
  if (atoms.size() <= 2) return b.lower;
  if (b.upper <= cfg.resolution) return 0.0;
  if (b.lower < cfg.ap_floor)
    throw Error(ErrorCode::Uncertain, "almost-periodic lower bound below resolution floor");
  return b.lower;
}

namespace detail {

/// Rigorous sup over |y| >= big_y of the rational part.
inline double terms_tail(const LineElement& f, double big_y) {
  double s = 0.0;
  for (const RationalTerm& t : f.terms()) s += t.tail_bound(big_y);
  return s;
}

struct LocalBound {
  double terms_sup = 0.0;
  double lipschitz = 0.0;
  double curvature = 0.0;
};

inline LocalBound local_bound(const LineElement& f, double a, double b) {
  LocalBound lb{0.0, f.atom_lipschitz(), f.atom_curvature()};
  for (const RationalTerm& t : f.terms()) {
    const TermBound tb = t.bound_on(a, b);
    lb.terms_sup += tb.sup_abs;
    lb.lipschitz += tb.lipschitz;
    lb.curvature += tb.curvature;
  }
  return lb;
}

// With f = F(m), df = F'(m): |F(m) + df t|^2 = |f|^2 + 2 beta t + alpha t^2.
// Range of its square root over |t| <= r, widened by the curvature term.
inline double taylor_upper(Complex f, Complex df, double r, double curv) {
  const double beta = std::abs((std::conj(f) * df).real());
  return std::sqrt(std::norm(f) + 2.0 * beta * r + std::norm(df) * r * r) + 0.5 * curv * r * r;
}

inline double taylor_lower(Complex f, Complex df, double r, double curv) {
  const double alpha = std::norm(df);
  const double beta = (std::conj(f) * df).real();
  double q;
  if (alpha > 0.0 && std::abs(beta) <= alpha * r)
    q = std::norm(f) - beta * beta / alpha;
  else
    q = std::norm(f) - 2.0 * std::abs(beta) * r + alpha * r * r;
  return std::sqrt(std::max(q, 0.0)) - 0.5 * curv * r * r;
}

inline double min_shift(const LineElement& f) {
  double t = std::numeric_limits<double>::infinity();
  for (const Atom& a : f.atoms()) t = std::min(t, a.shift);
  for (const RationalTerm& r : f.terms()) t = std::min(t, r.shift());
  return t;
}

// f exp(s t_min): same modulus, no common phase rotation
inline bool has_common_delay(const LineElement& f) {
  const double t = min_shift(f);
  return std::isfinite(t) && t != 0.0;
}
inline LineElement unshifted(const LineElement& f) { return f * LineElement::atom(1.0, -min_shift(f)); }

inline double frequency_scale(const LineElement& f) { return 1.0 + f.max_pole_modulus(); }

/// Sweep half-width: at least the configured start, grown until the
/// rational tail is below `eps`.
inline double sweep_width(const LineElement& f, const GridConfig& cfg, double eps) {
  double y = cfg.ymax_hint > 0.0 ? cfg.ymax_hint : 100.0 * frequency_scale(f);
  y = std::max(y, 2.0 * frequency_scale(f));
  while (terms_tail(f, y) > eps && y < 1e13) y *= 2.0;
  return y;
}

}  // namespace detail

/// sup_y |F(iy)| with certified error <= cfg.tol. Real coefficients make
/// |F| even in y, so only y >= 0 is swept; beyond the sweep the supremum is
/// enclosed by the almost-periodic part plus the rational tail bound.
inline SupResult sup_norm(const LineElement& f, const GridConfig& cfg = {}) {
  if (f.is_zero()) return {};
  if (detail::has_common_delay(f)) return sup_norm(detail::unshifted(f), cfg);
  const Bracket ap = ap_sup(f.atoms(), cfg);
  const double big_y = detail::sweep_width(f, cfg, cfg.tol);
  const double tail_up = ap.upper + detail::terms_tail(f, big_y);
  auto val = [&f](double y) { return std::abs(f.eval(y)); };
  auto up = [&](double a, double b, double v) {
    const auto lb = detail::local_bound(f, a, b);
    const double m = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    const double second = detail::taylor_upper(f.eval(m), f.derivative(m), r, lb.curvature);
    return std::min({v + lb.lipschitz * r, second, ap.upper + lb.terms_sup});
  };
  const double s = std::min(detail::frequency_scale(f) / 16.0, big_y / 4.0);
  const double inf = std::numeric_limits<double>::infinity();
  auto r = bb::maximize(val, up, bb::geometric_edges(s, big_y), cfg.tol, cfg.budget, ap.lower, f.atoms().empty() ? 0.0 : inf);
  const double v0 = val(0.0);
  SupResult out;
  out.value = r.value;
  out.argmax = r.location;
  if (v0 >= out.value) {
    out.value = v0;
    out.argmax = 0.0;
  }
  out.certified = std::max({r.certified, tail_up, out.value});
  out.evals = r.evals + 1;
  if (out.certified - out.value > cfg.tol * (1.0 + 1e-9))
    throw Error(ErrorCode::GridLimit, "sup could not be certified to tolerance");
  return out;
}

/// inf_y |F(iy)| with a certified lower bound. `rel_gap` > 0 stops as soon
/// as the bound is within that fraction of the incumbent (enough to certify
/// positivity); 0 asks for absolute accuracy cfg.tol.
inline InfResult inf_modulus(const LineElement& f, const GridConfig& cfg = {}, double rel_gap = 0.0) {
  if (f.atoms().empty()) return {0.0, std::numeric_limits<double>::infinity(), 0.0, 0};
  if (detail::has_common_delay(f)) return inf_modulus(detail::unshifted(f), cfg, rel_gap);
  const Bracket ap = ap_inf(f.atoms(), cfg);
  const double eps = std::max(cfg.tol, rel_gap > 0.0 ? 0.25 * rel_gap * ap.lower : 0.0);
  const double big_y = detail::sweep_width(f, cfg, f.atoms().empty() ? cfg.tol : std::max(eps, 1e-300));
  const double tail_low = ap.lower - detail::terms_tail(f, big_y);
  auto val = [&f](double y) { return std::abs(f.eval(y)); };
  auto low = [&](double a, double b, double v) {
    const auto lb = detail::local_bound(f, a, b);
    const double m = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    const double second = detail::taylor_lower(f.eval(m), f.derivative(m), r, lb.curvature);
    return std::max({v - lb.lipschitz * r, second, ap.lower - lb.terms_sup});
  };
  auto gap = [&](double best) { return std::max(rel_gap > 0.0 ? rel_gap * best : cfg.tol, cfg.resolution); };
  const double s = std::min(detail::frequency_scale(f) / 16.0, big_y / 4.0);
  const double inf = std::numeric_limits<double>::infinity();
  auto r = bb::minimize(val, low, bb::geometric_edges(s, big_y), gap, cfg.budget, ap.upper, inf);
  InfResult out;
  out.value = r.value;
  out.argmin = r.location;
  const double v0 = val(0.0);
  if (v0 <= out.value) {
    out.value = v0;
    out.argmin = 0.0;
  }
  out.certified = std::min({r.certified, tail_low, out.value});
  out.evals = r.evals;
  if (r.evals == std::numeric_limits<std::size_t>::max())
    throw Error(ErrorCode::GridLimit, "inf refinement budget exhausted");
  return out;
}

/// Invertibility in the line algebra: no zero on the axis and the
/// almost-periodic part bounded away from zero.
inline InvertCert is_invertible_in_A(const LineElement& f, const GridConfig& cfg = {}) {
  InvertCert cert;
  if (f.atoms().empty()) return cert;  // F(iy) -> 0 as |y| -> inf
  cert.ap_floor = ap_min_modulus(f.atoms(), cfg);
  if (cert.ap_floor <= cfg.resolution) return cert;
  InfResult r;
  try {
    r = inf_modulus(f, cfg, 0.5);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::GridLimit) throw Error(ErrorCode::Uncertain, "invertibility sweep did not certify");
    throw;
  }
  cert.line_floor = std::max(0.0, r.certified);
  if (r.value <= cfg.resolution) {
    cert.line_floor = 0.0;
    return cert;
  }
  if (r.certified <= 0.0) throw Error(ErrorCode::Uncertain, "axis modulus floor inside the resolution band");
  cert.invertible = true;
  return cert;
}

}  // namespace nugap
