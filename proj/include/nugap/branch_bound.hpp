#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "nugap/error.hpp"

namespace nugap::bb {

/// One cell of a branch-and-bound partition, carrying the value at its
/// midpoint and the bound derived from it.
struct Cell {
  double a = 0.0;
  double b = 0.0;
  double mid_value = 0.0;
  double bound = 0.0;
};

struct Extremum {
  double value = 0.0;     // best sampled |F| (after polishing)
  double location = 0.0;  // where it was sampled; +inf when only approached at infinity
  double certified = 0.0; // rigorous upper (sup) or lower (inf) bound on the true extremum
  std::size_t evals = 0;
};

/// Golden-section search for the maximum of f on [lo, hi].
template <typename F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iters = 80) {
  constexpr double g = 0.6180339887498949;
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iters && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

/// Certified maximisation of a nonnegative function over a union of cells.
///   value(y)            -> sampled value
///   upper(a, b, v_mid)  -> rigorous upper bound on [a, b] given the midpoint value
/// `best`/`best_at` seed the incumbent (e.g. a limit approached at infinity).
/// Stops when every open cell's bound is within tol of the incumbent. With
/// `strict` off an exhausted budget is not an error: the largest open bound
/// is still a rigorous (looser) certificate.
template <typename Value, typename Upper>
Extremum maximize(Value&& value, Upper&& upper, const std::vector<double>& edges, double tol,
                  std::size_t budget, double best, double best_at, bool strict = true) {
  auto cmp = [](const Cell& x, const Cell& y) { return x.bound < y.bound; };
  std::priority_queue<Cell, std::vector<Cell>, decltype(cmp)> open(cmp);
  Extremum out;
  double best_width = 0.0;
  auto push = [&](double a, double b) {
    const double m = 0.5 * (a + b);
    const double v = value(m);
    ++out.evals;
    if (v > best) {
      best = v;
      best_at = m;
      best_width = b - a;
    }
    open.push(Cell{a, b, v, upper(a, b, v)});
  };
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) push(edges[i], edges[i + 1]);
  while (!open.empty()) {
    const Cell c = open.top();
    if (c.bound <= best + tol) break;
    if (out.evals >= budget) {
      if (!strict) break;
      throw Error(ErrorCode::GridLimit, "sup refinement budget exhausted before tolerance was met");
    }
    open.pop();
    const double m = 0.5 * (c.a + c.b);
    if (!(m > c.a && m < c.b)) continue;  // interval below floating resolution
    push(c.a, m);
    push(m, c.b);
  }
  out.certified = open.empty() ? best : std::max(best, open.top().bound);
  if (std::isfinite(best_at) && best_width > 0.0) {
    auto [x, v] = golden_max(value, best_at - best_width, best_at + best_width);
    out.evals += 80;
    if (v > best) {
      best = v;
      best_at = x;
    }
  }
  out.value = best;
  out.location = best_at;
  out.certified = std::max(out.certified, best);
  return out;
}

/// Certified minimisation; `lower(a, b, v_mid)` must be a rigorous lower bound.
/// Stops when every open cell's bound is within gap(best) of the incumbent.
template <typename Value, typename Lower, typename Gap>
Extremum minimize(Value&& value, Lower&& lower, const std::vector<double>& edges, Gap&& gap,
                  std::size_t budget, double best, double best_at) {
  auto cmp = [](const Cell& x, const Cell& y) { return x.bound > y.bound; };
  std::priority_queue<Cell, std::vector<Cell>, decltype(cmp)> open(cmp);
  Extremum out;
  double best_width = 0.0;
  auto push = [&](double a, double b) {
    const double m = 0.5 * (a + b);
    const double v = value(m);
    ++out.evals;
    if (v < best) {
      best = v;
      best_at = m;
      best_width = b - a;
    }
    open.push(Cell{a, b, v, lower(a, b, v)});
  };
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) push(edges[i], edges[i + 1]);
  bool exhausted = false;
  while (!open.empty()) {
    const Cell c = open.top();
    if (c.bound >= best - gap(best)) break;
    if (out.evals >= budget) {
      exhausted = true;
      break;
    }
    open.pop();
    const double m = 0.5 * (c.a + c.b);
    if (!(m > c.a && m < c.b)) continue;
    push(c.a, m);
    push(m, c.b);
  }
  out.certified = open.empty() ? best : std::min(best, open.top().bound);
  if (std::isfinite(best_at) && best_width > 0.0) {
    auto neg = [&value](double y) { return -value(y); };
    auto [x, v] = golden_max(neg, best_at - best_width, best_at + best_width);
    out.evals += 80;
    if (-v < best) {
      best = -v;
      best_at = x;
    }
  }
  out.value = best;
  out.location = best_at;
  out.certified = std::min(out.certified, best);
  if (exhausted) out.evals = std::numeric_limits<std::size_t>::max();
  return out;
}

/// Partition of [0, y_max] refined geometrically towards 0: edges at 0, s,
/// 2s, 4s, ... and y_max, with each octave further split into `per_octave`.
inline std::vector<double> geometric_edges(double s, double y_max, int per_octave = 4) {
  std::vector<double> e{0.0};
  for (int k = 1; k <= per_octave; ++k) e.push_back(s * k / per_octave);
  double lo = s;
  while (lo < y_max) {
    const double hi = std::min(2.0 * lo, y_max);
    for (int k = 1; k <= per_octave; ++k) e.push_back(std::min(lo + (hi - lo) * k / per_octave, y_max));
    lo = hi;
  }
  std::vector<double> u;
  for (double x : e)
    if (u.empty() || x > u.back()) u.push_back(x);
  return u;
}

}  // namespace nugap::bb
