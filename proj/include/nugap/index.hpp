#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "nugap/algebra.hpp"
#include "nugap/element.hpp"
#include "nugap/error.hpp"

namespace nugap {

/// W(F) = (mean motion of the AP part, winding number of F / F_AP).
struct IndexPair {
  double ap_motion = 0.0;
  long rel_wind = 0;

  friend IndexPair operator+(const IndexPair& a, const IndexPair& b) {
    return {a.ap_motion + b.ap_motion, a.rel_wind + b.rel_wind};
  }
  IndexPair operator-() const { return {-ap_motion, -rel_wind}; }
  bool is_zero(double tol_w = 1e-9) const { return rel_wind == 0 && std::abs(ap_motion) < tol_w; }
};

struct WindingSample {
  double y = 0.0;
  double phase = 0.0;
  double modulus = 0.0;
};

struct WindingTrace {
  std::vector<WindingSample> samples;
  double total_turn = 0.0;  // in turns (radians / 2 pi)
  bool certified = false;
};

struct IndexConfig {
  GridConfig grid{};
  double snap_turns = 0.05;      // max distance of the raw winding from an integer
  double tol_w = 1e-9;           // |mean motion| below this counts as zero
  double motion_tol = 1e-5;      // convergence of numeric mean-motion tracking
  double motion_max_horizon = 1e6;
  std::size_t cell_budget = 2'000'000;
};

namespace detail {

// Unwrapped arg change of sum c_k exp(-i y (t_k - t0)) over [-T, T], with
// steps small enough that |dF| <= |F|/2 (so each step turns less than pi/6).
inline double tracked_phase_change(std::span<const Atom> atoms, double t0, double lip, double horizon) {
  auto f = [&](double y) {
    Complex acc(0.0);
    for (const Atom& a : atoms) acc += a.coeff * std::exp(Complex(0.0, -y * (a.shift - t0)));
    return acc;
  };
  double y = -horizon;
  Complex prev = f(y);
  double total = 0.0;
  while (y < horizon) {
    const double h = std::min(0.5 * std::abs(prev) / lip, horizon - y);
    if (!(h > 0.0)) throw Error(ErrorCode::NotInvertibleAp, "almost-periodic part vanishes during tracking");
    y += h;
    const Complex cur = f(y);
    total += std::arg(cur / prev);
    prev = cur;
  }
  return total;
}

}  // namespace detail

/// Average winding number lim (arg F(T) - arg F(-T)) / 2T of a finite
/// exponential sum. Closed forms when one atom dominates (including every
/// invertible two-atom sum); numeric tracking over doubling horizons beyond
/// that, snapped onto the frequency lattice when the shifts are commensurate.
inline double ap_mean_motion(std::span<const Atom> atoms, const IndexConfig& cfg = {}) {
  if (atoms.empty()) throw Error(ErrorCode::NotInvertibleAp, "empty almost-periodic part");
  double l1 = 0.0;
  for (const Atom& a : atoms) l1 += std::abs(a.coeff);
  for (const Atom& a : atoms)
    if (std::abs(a.coeff) > l1 - std::abs(a.coeff)) return a.shift == 0.0 ? 0.0 : -a.shift;
  if (atoms.size() <= 2) throw Error(ErrorCode::NotInvertibleAp, "equal-modulus atoms: almost-periodic part has zeros");

  const double floor = ap_min_modulus(atoms, cfg.grid);
  if (floor <= cfg.grid.resolution) throw Error(ErrorCode::NotInvertibleAp, "almost-periodic part has zeros");

  const double t0 = atoms.front().shift;
  const double lip = std::max(detail::ap_lipschitz_rel(atoms), 1e-300);
  const double span = atoms.back().shift - t0;
  double horizon = 200.0 * std::numbers::pi / span;
  double prev = detail::tracked_phase_change(atoms, t0, lip, horizon) / (2.0 * horizon);
  double rel = prev;
  bool converged = false;
  while (horizon < cfg.motion_max_horizon) {
    horizon *= 2.0;
    rel = detail::tracked_phase_change(atoms, t0, lip, horizon) / (2.0 * horizon);
    if (std::abs(rel - prev) < cfg.motion_tol * std::max(1.0, span)) {
      converged = true;
      break;
    }
    prev = rel;
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "mean motion did not settle within the horizon budget");
  if (auto c = detail::commensurate(atoms)) {
    const double k = std::round(-rel / c->quantum);
    if (c->quantum > 20.0 * cfg.motion_tol * std::max(1.0, span) && std::abs(-rel / c->quantum - k) < 0.25) {
      const double w = -t0 - k * c->quantum;
      return w == 0.0 ? 0.0 : w;
    }
  }
  return -t0 + rel;
}

/// Winding number of y -> F(iy) / F_AP(iy) as y runs from -inf to +inf
/// (counter-clockwise positive). For delay-free rational symbols this equals
/// (#open-RHP poles - #open-RHP zeros).
inline long relative_winding(const LineElement& f, const IndexConfig& cfg = {}, WindingTrace* trace = nullptr) {
  if (f.atoms().empty()) throw Error(ErrorCode::NotInvertibleAp, "element without almost-periodic part is not invertible");
  if (trace) *trace = {};
  if (f.terms().empty()) {
    if (trace) trace->certified = true;
    return 0;
  }
  const double m = ap_min_modulus(f.atoms(), cfg.grid);
  if (m <= cfg.grid.resolution) throw Error(ErrorCode::NotInvertibleAp, "almost-periodic part is not invertible");
  const double ap_lip = f.atom_lipschitz();

  // |g - 1| <= 1/4 beyond the sweep, so the tail turns by less than pi/2
  double big_y = std::max(100.0 * detail::frequency_scale(f), 2.0 * detail::frequency_scale(f));
  while (detail::terms_tail(f, big_y) / m > 0.25) {
    big_y *= 2.0;
    if (big_y > 1e14) throw Error(ErrorCode::ModulusFloor, "rational tail does not decay below the AP floor");
  }

  auto g = [&f](double y) { return f.eval(y) / f.ap_eval(y); };
  struct Span {
    double a, b;
  };
  std::vector<Span> stack;
  {
    const double s = std::min(detail::frequency_scale(f) / 16.0, big_y / 4.0);
    const auto pos = bb::geometric_edges(s, big_y);
    std::vector<double> edges;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it)
      if (*it > 0.0) edges.push_back(-*it);
    edges.insert(edges.end(), pos.begin(), pos.end());
    for (std::size_t i = edges.size() - 1; i > 0; --i) stack.push_back({edges[i - 1], edges[i]});
  }
  // depth-first, left to right, so accepted cells come out in order
  std::vector<Span> accepted;
  std::size_t cells = 0;
  while (!stack.empty()) {
    const Span c = stack.back();
    stack.pop_back();
    if (++cells > cfg.cell_budget) throw Error(ErrorCode::AmbiguousWinding, "winding refinement budget exhausted");
    const double mid = 0.5 * (c.a + c.b);
    const double gm = std::abs(g(mid));
    if (gm <= cfg.grid.resolution) throw Error(ErrorCode::ModulusFloor, "F / F_AP dips below resolution");
    double t_sup = 0.0;
    double t_lip = 0.0;
    for (const RationalTerm& t : f.terms()) {
      const TermBound tb = t.bound_on(c.a, c.b);
      t_sup += tb.sup_abs;
      t_lip += tb.lipschitz;
    }
    const double g_lip = t_lip / m + t_sup * ap_lip / (m * m);
    if (0.5 * g_lip * (c.b - c.a) <= 0.5 * gm) {
      accepted.push_back(c);
      continue;
    }
    if (!(mid > c.a && mid < c.b)) throw Error(ErrorCode::ModulusFloor, "winding cell below floating resolution");
    stack.push_back({mid, c.b});
    stack.push_back({c.a, mid});
  }

  Complex prev = g(accepted.front().a);
  double phase = std::arg(prev);  // principal value at -Y; the limit at -inf is arg 1 = 0
  double total = phase;
  if (trace) trace->samples.push_back({accepted.front().a, phase, std::abs(prev)});
  for (const Span& c : accepted) {
    const Complex cur = g(c.b);
    const double d = std::arg(cur / prev);
    phase += d;
    total += d;
    prev = cur;
    if (trace) trace->samples.push_back({c.b, phase, std::abs(cur)});
  }
  total -= std::arg(prev);  // closes to arg 1 = 0 at +inf
  const double turns = total / (2.0 * std::numbers::pi);
  const double n = std::round(turns);
  if (trace) trace->total_turn = turns;
  if (std::abs(turns - n) > cfg.snap_turns)
    throw Error(ErrorCode::AmbiguousWinding, "raw winding is not within the snap band of an integer");
  if (trace) trace->certified = true;
  return static_cast<long>(n);
}

/// W(F) for F invertible in the line algebra.
inline IndexPair index_W(const LineElement& f, const IndexConfig& cfg = {}) {
  if (f.atoms().empty()) throw Error(ErrorCode::NotInvertibleAp, "element without almost-periodic part is not invertible");
  return {ap_mean_motion(f.atoms(), cfg), relative_winding(f, cfg)};
}

/// Invertibility in the half-line algebra: invertible on the line with
/// index (0, 0).
inline bool invertible_in_Aplus(const PlusElement& f, const IndexConfig& cfg = {}, IndexPair* index = nullptr) {
  const InvertCert cert = is_invertible_in_A(f, cfg.grid);
  if (!cert.invertible) return false;
  const IndexPair w = index_W(f, cfg);
  if (index) *index = w;
  return w.is_zero(cfg.tol_w);
}

}  // namespace nugap
