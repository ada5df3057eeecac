#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "nugap/algebra.hpp"
#include "nugap/factorization.hpp"
#include "nugap/index.hpp"
#include "nugap/minimax.hpp"
#include "nugap/toeplitz.hpp"

namespace nugap {

struct MetricConfig {
  GridConfig grid{};
  int fir_order = 64;      // L
  int circle_grid = 2048;  // N
  double gap_tol = 1e-5;   // accuracy of certified residual sups
  MinimaxConfig solver{};

  IndexConfig index() const {
    IndexConfig ic;
    ic.grid = grid;
    return ic;
  }
};

enum class NuBranch { Norm, UnitNotInvertible, UnitNonzeroIndex };

constexpr std::string_view to_string(NuBranch b) {
  switch (b) {
    case NuBranch::Norm: return "NORM";
    case NuBranch::UnitNotInvertible: return "UNIT_NOT_INVERTIBLE";
    case NuBranch::UnitNonzeroIndex: return "UNIT_NONZERO_INDEX";
  }
  return "UNKNOWN";
}

struct NuResult {
  double value = 1.0;
  NuBranch branch = NuBranch::UnitNotInvertible;
  LineElement inner;                 // G1* G2
  std::optional<IndexPair> index;    // W(G1* G2) when invertible
  double norm_sup = 0.0;             // sup |G2~ G1|, whatever the branch
  double norm_certified = 0.0;       // rigorous upper bound on norm_sup
  double argmax = 0.0;               // frequency of norm_sup (+inf if approached at infinity)
  std::size_t evals = 0;
};

struct GapBracket {
  double lower = 0.0;
  double upper = 1.0;
  int fir_order = 0;
  int circle_grid = 0;
};

struct MarginReport {
  bool stabilized = false;
  double mu = 0.0;
  std::optional<IndexPair> delta_index;
  double argmin = 0.0;
};

namespace detail {

// rethrow certification failures of the branch logic as UNCERTAIN
template <typename F>
auto certify(F&& f, const char* what) {
  try {
    return f();
  } catch (const Error& e) {
    if (is_certification_failure(e.code()) && e.code() != ErrorCode::Uncertain)
      throw Error(ErrorCode::Uncertain, std::string(what) + " (" + e.what() + ")");
    throw;
  }
}

inline bool plant_less(const PlantDesc& a, const PlantDesc& b) {
  if (a.tau != b.tau) return a.tau < b.tau;
  if (a.den != b.den) return Poly::canonical_less(a.den, b.den);
  return Poly::canonical_less(a.num, b.num);
}

inline double lead_ratio(const PlantDesc& p) {
  if (p.num.is_zero() || p.num.degree() < p.den.degree()) return 0.0;
  return p.num.lead() / p.den.lead();
}

}  // namespace detail

/// G1* G2 = n1* n2 + d1* d2.
inline LineElement inner_graph_product(const CoprimeFactors& f1, const CoprimeFactors& f2) {
  return f1.n.line().star() * f2.n.line() + f1.d.line().star() * f2.d.line();
}

/// G2~ G1 = -d2 n1 + n2 d1.
inline LineElement cross_product(const CoprimeFactors& f1, const CoprimeFactors& f2) {
  return f2.n.line() * f1.d.line() - f2.d.line() * f1.n.line();
}

inline NuResult nu_metric(const PlantDesc& p1, const PlantDesc& p2, const MetricConfig& cfg = {}) {
  const CoprimeFactors f1 = ncf(p1);
  const CoprimeFactors f2 = ncf(p2);
  NuResult r;
  r.inner = inner_graph_product(f1, f2);
  // |G2~ G1| = |G1~ G2| pointwise; sweep a fixed orientation so the value is symmetric bitwise
  const bool swap = detail::plant_less(p2, p1);
  const LineElement cross = swap ? cross_product(f2, f1) : cross_product(f1, f2);
  const SupResult s = sup_norm(cross, cfg.grid);
  r.norm_sup = s.value;
  r.norm_certified = s.certified;
  r.argmax = s.argmax;
  r.evals = s.evals;
  const IndexConfig ic = cfg.index();
  const InvertCert cert = detail::certify([&] { return is_invertible_in_A(r.inner, cfg.grid); }, "invertibility of G1* G2");
  if (!cert.invertible) {
    r.branch = NuBranch::UnitNotInvertible;
    r.value = 1.0;
    return r;
  }
  r.index = detail::certify([&] { return index_W(r.inner, ic); }, "index of G1* G2");
  if (!r.index->is_zero(ic.tol_w)) {
    r.branch = NuBranch::UnitNonzeroIndex;
    r.value = 1.0;
    return r;
  }
  r.branch = NuBranch::Norm;
  r.value = s.value;
  return r;
}

/// Independent sup of the pointwise chordal distance, straight from the
/// transfer functions: dense log sampling, golden refinement of the best
/// local maxima and the limit as |y| -> infinity.
inline double chordal_sup(const PlantDesc& p1, const PlantDesc& p2) {
  std::vector<Complex> poles = roots(p1.den);
  for (const Complex& r : roots(p2.den)) poles.push_back(r);
  auto near_pole = [&](double y) {
    for (const Complex& r : poles)
      if (std::abs(Complex(0.0, y) - r) < 1e-8) return true;
    return false;
  };
  auto chord = [&](double y) {
    if (near_pole(y)) return 0.0;
    const Complex a = p1.eval(y);
    const Complex b = p2.eval(y);
    return std::abs(a - b) / (std::sqrt(1.0 + std::norm(a)) * std::sqrt(1.0 + std::norm(b)));
  };
  const double k1 = detail::lead_ratio(p1);
  const double k2 = detail::lead_ratio(p2);
  const double norm12 = std::sqrt(1.0 + k1 * k1) * std::sqrt(1.0 + k2 * k2);
  double best = (k1 != 0.0 && k2 != 0.0 && p1.tau != p2.tau) ? (std::abs(k1) + std::abs(k2)) / norm12
                                                              : std::abs(k1 - k2) / norm12;
  best = std::max(best, chord(0.0));
  double scale = 1.0 + max_root_modulus(poles);
  for (const Complex& z : roots(p1.num)) scale = std::max(scale, 1.0 + std::abs(z));
  for (const Complex& z : roots(p2.num)) scale = std::max(scale, 1.0 + std::abs(z));
  const double tau = std::max(p1.tau, p2.tau);
  const double y_hi = 1e4 * scale;
  const double y_lo = 1e-4 / scale;
  // resolve delay oscillations up to y_hi with ~16 samples per period
  const int per_decade = 2000;
  const int n = static_cast<int>(per_decade * std::log10(y_hi / y_lo));
  std::vector<double> ys;
  std::vector<double> vs;
  ys.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) ys.push_back(y_lo * std::pow(y_hi / y_lo, static_cast<double>(i) / n));
  if (tau > 0.0) {
    // linear fill where the log grid is too coarse for the phase
    const double step = 2.0 * std::numbers::pi / (16.0 * tau);
    for (double y = step; y < std::min(y_hi, 2e5 * step); y += step) ys.push_back(y);
    std::sort(ys.begin(), ys.end());
  }
  vs.reserve(ys.size());
  for (double y : ys) vs.push_back(chord(y));
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < ys.size(); ++i)
    if (vs[i] >= vs[i - 1] && vs[i] >= vs[i + 1]) peaks.push_back(i);
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return vs[a] > vs[b]; });
  if (peaks.size() > 16) peaks.resize(16);
  for (double v : vs) best = std::max(best, v);
  for (std::size_t i : peaks) best = std::max(best, bb::golden_max(chord, ys[i - 1], ys[i + 1], 100).second);
  return best;
}

// ---------------------------------------------------------------------------
// circle data for the q-parametrised problems

namespace detail {

struct CircleData {
  std::vector<Complex> x;    // G2* G1
  std::vector<double> c;     // |G2~ G1|^2
  std::vector<bool> active;  // j = 0 (y = inf) only when both plants are delay-free
};

inline CircleData circle_data(const CoprimeFactors& f1, const CoprimeFactors& f2, int n) {
  const LineElement x = inner_graph_product(f2, f1);
  const LineElement y = cross_product(f1, f2);
  CircleData d;
  d.x.resize(static_cast<std::size_t>(n));
  d.c.resize(static_cast<std::size_t>(n));
  d.active.assign(static_cast<std::size_t>(n), true);
  for (int j = 1; j < n; ++j) {
    const double yy = 1.0 / std::tan(std::numbers::pi * j / n);
    d.x[static_cast<std::size_t>(j)] = x.eval(yy);
    d.c[static_cast<std::size_t>(j)] = std::norm(y.eval(yy));
  }
  if (x.delay_free() && y.delay_free()) {
    double xa = 0.0;
    double ya = 0.0;
    for (const Atom& a : x.atoms()) xa += a.coeff;
    for (const Atom& a : y.atoms()) ya += a.coeff;
    d.x[0] = xa;
    d.c[0] = ya * ya;
  } else {
    d.active[0] = false;
  }
  return d;
}

inline Column column(const CoprimeFactors& f) { return {f.n.line(), f.d.line()}; }

// winding of q around 0 along the circle, or nullopt if q may vanish there
inline std::optional<long> circle_winding(const CircleSeries& q, int m = 1 << 14) {
  Eigen::FFT<double> fft;
  std::vector<Complex> spec(static_cast<std::size_t>(m), Complex(0.0));
  for (std::size_t i = 0; i < q.theta.size(); ++i) {
    const int k = q.k_lo + static_cast<int>(i);
    spec[static_cast<std::size_t>(((k % m) + m) % m)] = q.theta[i];
  }
  std::vector<Complex> v;
  fft.inv(v, spec);
  double vmin = std::numeric_limits<double>::infinity();
  for (Complex& z : v) {
    z *= static_cast<double>(m);
    vmin = std::min(vmin, std::abs(z));
  }
  // |q| varies by at most moment(1) * (pi / m) between neighbouring samples
  if (vmin - q.moment(1) * std::numbers::pi / m <= 1e-9 * (1.0 + q.l1())) return std::nullopt;
  double turn = 0.0;
  for (int j = 0; j < m; ++j) turn += std::arg(v[static_cast<std::size_t>((j + 1) % m)] / v[static_cast<std::size_t>(j)]);
  return std::lround(turn / (2.0 * std::numbers::pi));
}

inline bool same_plant(const PlantDesc& a, const PlantDesc& b) { return a.tau == b.tau && a.num == b.num && a.den == b.den; }

inline std::vector<int> order_ladder(int top) {
  std::vector<int> l;
  for (int k = 8; k < top; k *= 2) l.push_back(k);
  l.push_back(top);
  return l;
}

}  // namespace detail

struct NuAltResult {
  double value = 0.0;  // certified upper end of the best accepted candidate
  int order = 0;
  int accepted = 0;
};

/// Upper bounds on inf ||G1 - G2 q|| over invertible q with W(q) = (0, 0),
/// q running over Laurent polynomials in the Cayley coordinate of order
/// L in `orders` (nested families, warm-started, best-so-far carried) plus the
/// constants 1/k.
inline std::vector<NuAltResult> nu_alt_ladder(const PlantDesc& p1, const PlantDesc& p2, const std::vector<int>& orders,
                                              const MetricConfig& cfg = {}) {
  const CoprimeFactors f1 = ncf(p1);
  const CoprimeFactors f2 = ncf(p2);
  const Column g1 = detail::column(f1);
  const Column g2 = detail::column(f2);
  const detail::CircleData cd = detail::circle_data(f1, f2, cfg.circle_grid);

  double best = std::numeric_limits<double>::infinity();
  int accepted = 0;
  for (int k = 1; k <= 4096; k *= 4) {
    CircleSeries q{0, {1.0 / k}};
    best = std::min(best, residual_sup(g1, g2, q, cfg.gap_tol).certified);
    ++accepted;
  }
  std::vector<NuAltResult> out;
  if (detail::same_plant(p1, p2)) {
    // q = 1 leaves an identically zero residual
    for (int order : orders) out.push_back({0.0, order, 1});
    return out;
  }
  CircleSeries warm{0, {}};
  for (int order : orders) {
    const MinimaxResult mm = lawson_minimax(cd.x, cd.c, cd.active, -order, order, cfg.solver, &warm);
    warm = mm.q;
    // a candidate must be invertible with zero winding (and zero mean motion: no delays)
    const auto w = detail::circle_winding(mm.q);
    if (w && *w == 0) {
      best = std::min(best, residual_sup(g1, g2, mm.q, cfg.gap_tol).certified);
      ++accepted;
    }
    out.push_back({best, order, accepted});
  }
  if (accepted == 0) throw Error(ErrorCode::NoFeasibleQ, "no candidate passed the invertibility filter");
  return out;
}

inline double nu_alt_upper(const PlantDesc& p1, const PlantDesc& p2, int order, const MetricConfig& cfg = {}) {
  return nu_alt_ladder(p1, p2, detail::order_ladder(order), cfg).back().value;
}

// ---------------------------------------------------------------------------
// gap

inline GapBracket directed_gap_bracket(const PlantDesc& p1, const PlantDesc& p2, const MetricConfig& cfg = {}) {
  const CoprimeFactors f1 = ncf(p1);
  const CoprimeFactors f2 = ncf(p2);
  GapBracket g;
  g.fir_order = cfg.fir_order;
  g.circle_grid = cfg.circle_grid;
  const LineElement cross = cross_product(f1, f2);
  g.lower = sup_norm(cross, cfg.grid).value;
  const LineElement x = inner_graph_product(f2, f1);
  if (x.delay_free()) g.lower = std::max(g.lower, hankel_sigma(x, cfg.circle_grid));

  if (detail::same_plant(p1, p2)) {
    g.lower = g.upper = 0.0;
    return g;
  }
  const detail::CircleData cd = detail::circle_data(f1, f2, cfg.circle_grid);
  CircleSeries warm{0, {}};
  for (int order : detail::order_ladder(cfg.fir_order)) {
    warm = lawson_minimax(cd.x, cd.c, cd.active, 0, order, cfg.solver, &warm).q;
  }
  const ResidualSup rs = residual_sup(detail::column(f1), detail::column(f2), warm, cfg.gap_tol);
  // q = 0 gives |G1| = 1
  g.upper = std::min(rs.certified, 1.0);
  g.lower = std::min(g.lower, g.upper);
  return g;
}

inline GapBracket gap_bracket(const PlantDesc& p1, const PlantDesc& p2, const MetricConfig& cfg = {}) {
  const GapBracket a = directed_gap_bracket(p1, p2, cfg);
  const GapBracket b = directed_gap_bracket(p2, p1, cfg);
  return {std::max(a.lower, b.lower), std::max(a.upper, b.upper), cfg.fir_order, cfg.circle_grid};
}

// ---------------------------------------------------------------------------
// stability

/// delta = -x n + y d for p = n / d and c = x / y; the closed loop with
/// c in positive feedback around p is stable iff delta is invertible in the
/// half-line algebra.
inline PlusElement closed_loop_delta(const CoprimeFactors& fp, const CoprimeFactors& fc) {
  return fc.d * fp.d - fc.n * fp.n;
}

inline MarginReport is_stabilized(const PlantDesc& p, const PlantDesc& c, const MetricConfig& cfg = {}) {
  const PlusElement delta = closed_loop_delta(ncf(p), ncf(c));
  MarginReport r;
  const InvertCert cert = is_invertible_in_A(delta, cfg.grid);
  if (!cert.invertible) return r;
  r.delta_index = index_W(delta, cfg.index());
  r.stabilized = r.delta_index->is_zero(cfg.index().tol_w);
  return r;
}

/// mu = 1 / sup ||H(p, c)(iy)||; pointwise ||H|| = 1 / |delta|, so mu = inf |delta|.
inline MarginReport stability_margin(const PlantDesc& p, const PlantDesc& c, const MetricConfig& cfg = {}) {
  MarginReport r = is_stabilized(p, c, cfg);
  if (!r.stabilized) return r;
  const PlusElement delta = closed_loop_delta(ncf(p), ncf(c));
  const InfResult inf = inf_modulus(delta, cfg.grid);
  r.mu = std::min(inf.value, 1.0);
  r.argmin = inf.argmin;
  return r;
}

/// Constant gains +-g and first-order sections +-g (s + z) / (s + p) with
/// parameters log-spaced in [1e-2, 1e2], plus `extra` random draws.
inline std::vector<PlantDesc> controller_candidates(std::uint64_t seed = 1, int extra = 16) {
  std::vector<PlantDesc> out;
  std::vector<double> gains;
  for (int i = -6; i <= 6; ++i) gains.push_back(std::pow(10.0, i / 3.0));
  for (double g : gains)
    for (double sg : {1.0, -1.0}) out.push_back({0.0, Poly{sg * g}, Poly{1.0}, ""});
  const double pz[] = {1e-2, 1e-1, 1.0, 1e1, 1e2};
  for (double g : pz)
    for (double z : pz)
      for (double p : pz) {
        if (z == p) continue;
        for (double sg : {1.0, -1.0}) out.push_back({0.0, Poly{sg * g * z, sg * g}, Poly{p, 1.0}, ""});
      }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logu(-2.0, 2.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < extra; ++i) {
    const double g = std::pow(10.0, logu(rng)) * (coin(rng) ? 1.0 : -1.0);
    const double z = std::pow(10.0, logu(rng));
    const double p = std::pow(10.0, logu(rng));
    if (std::abs(z - p) < 1e-6 * p) continue;
    out.push_back({0.0, Poly{g * z, g}, Poly{p, 1.0}, ""});
  }
  return out;
}

struct MuOptResult {
  double mu = 0.0;
  int best = -1;  // index into the candidate list
  int stabilizing = 0;
};

/// max over candidates of the stability margin. Stabilizing candidates are
/// ranked by a sampled estimate of inf |delta|; the best `keep` get a
/// certified margin.
inline MuOptResult mu_opt_lower(const PlantDesc& p, const std::vector<PlantDesc>& candidates, const MetricConfig& cfg = {},
                                std::size_t keep = 4) {
  MuOptResult res;
  if (candidates.empty()) return res;
  const CoprimeFactors fp = ncf(p);
  std::vector<std::pair<double, int>> ranked;
  std::vector<double> probe;
  for (int i = 0; i <= 400; ++i) probe.push_back(std::pow(10.0, -3.0 + 7.0 * i / 400.0));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      const PlusElement delta = closed_loop_delta(fp, ncf(candidates[i]));
      const InvertCert cert = is_invertible_in_A(delta, cfg.grid);
      if (!cert.invertible || !index_W(delta, cfg.index()).is_zero()) continue;
      double est = std::abs(delta.eval(0.0));
      for (double y : probe) est = std::min(est, std::abs(delta.eval(y)));
      ranked.emplace_back(est, static_cast<int>(i));
    } catch (const Error&) {
      // uncertified candidates are skipped: they would not yield a valid bound
    }
  }
  res.stabilizing = static_cast<int>(ranked.size());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (ranked.size() > keep) ranked.resize(keep);
  for (const auto& [est, i] : ranked) {
    try {
      const MarginReport m = stability_margin(p, candidates[static_cast<std::size_t>(i)], cfg);
      if (m.stabilized && m.mu > res.mu) {
        res.mu = m.mu;
        res.best = i;
      }
    } catch (const Error&) {
    }
  }
  return res;
}

struct RobustnessReport {
  double mu_p = 0.0;
  double mu_pprime = 0.0;
  double d_nu = 1.0;
  NuBranch branch = NuBranch::Norm;
  double rhs = 0.0;    // mu_p - d_nu
  double slack = 0.0;  // mu_pprime - rhs
  bool holds = false;
  bool vacuous = false;
};

/// mu(p', c) >= mu(p, c) - d_nu(p, p').
inline RobustnessReport certify_robustness(const PlantDesc& p, const PlantDesc& pprime, const PlantDesc& c,
                                           const MetricConfig& cfg = {}, double tol = 1e-6) {
  RobustnessReport r;
  r.mu_p = stability_margin(p, c, cfg).mu;
  r.mu_pprime = stability_margin(pprime, c, cfg).mu;
  const NuResult nu = nu_metric(p, pprime, cfg);
  r.d_nu = nu.value;
  r.branch = nu.branch;
  r.rhs = r.mu_p - r.d_nu;
  r.slack = r.mu_pprime - r.rhs;
  r.holds = r.slack >= -tol;
  r.vacuous = r.rhs <= 0.0;
  return r;
}

}  // namespace nugap
