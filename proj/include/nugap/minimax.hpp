#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "nugap/algebra.hpp"
#include "nugap/branch_bound.hpp"
#include "nugap/element.hpp"
#include "nugap/error.hpp"

namespace nugap {

/// q(z) = sum_{k = k_lo}^{k_hi} theta_k z^k with real coefficients, z the
/// Cayley coordinate (s - 1) / (s + 1). k_lo = 0 keeps q stable.
struct CircleSeries {
  int k_lo = 0;
  std::vector<double> theta;

  int k_hi() const { return k_lo + static_cast<int>(theta.size()) - 1; }

  Complex at_z(Complex z) const {
    // Horner in z, then the k_lo power
    Complex acc(0.0);
    for (auto it = theta.rbegin(); it != theta.rend(); ++it) acc = acc * z + *it;
    return k_lo == 0 ? acc : acc * std::pow(z, k_lo);
  }
  Complex dz(Complex z) const {
    Complex acc(0.0);
    for (int i = static_cast<int>(theta.size()) - 1; i >= 0; --i)
      acc = acc * z + static_cast<double>(k_lo + i) * theta[static_cast<std::size_t>(i)];
    return acc * std::pow(z, k_lo - 1);
  }
  static Complex cayley(double y) { return Complex(-1.0, y) / Complex(1.0, y); }

  double l1() const {
    double s = 0.0;
    for (double t : theta) s += std::abs(t);
    return s;
  }
  // sum |k|^p |theta_k|: bounds |q^(p)| on the unit circle
  double moment(int p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double k = std::abs(static_cast<double>(k_lo + static_cast<int>(i)));
      double f = 1.0;
      for (int j = 0; j < p; ++j) f *= k + j;
      s += f * std::abs(theta[i]);
    }
    return s;
  }
};

struct MinimaxResult {
  CircleSeries q;
  double sampled = 0.0;  // max over the circle samples of the objective
  int iterations = 0;
};

struct MinimaxConfig {
  int max_iter = 600;
  int patience = 60;
  double exponent = 1.0;
};

/// Lawson iteration for min over real theta of max_j sqrt(|x_j - q(z_j)|^2 + c_j)
/// on the circle points phi_j = 2 pi j / N, j in `active` (weights elsewhere
/// are zero). Each step is a weighted least-squares fit whose Gram matrix is
/// Toeplitz in the FFT of the weights. The best iterate is kept.
inline MinimaxResult lawson_minimax(const std::vector<Complex>& x, const std::vector<double>& c,
                                    const std::vector<bool>& active, int k_lo, int k_hi,
                                    const MinimaxConfig& cfg = {}, const CircleSeries* warm = nullptr) {
  const int n = static_cast<int>(x.size());
  const int m = k_hi - k_lo + 1;
  if (m < 1 || 2 * std::max(std::abs(k_lo), std::abs(k_hi)) >= n)
    throw Error(ErrorCode::InvalidArgument, "series order too large for the circle grid");
  Eigen::FFT<double> fft;
  auto idx = [n](int k) { return static_cast<std::size_t>(((k % n) + n) % n); };

  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  int n_active = 0;
  for (int j = 0; j < n; ++j)
    if (active[static_cast<std::size_t>(j)]) ++n_active;
  if (n_active == 0) throw Error(ErrorCode::InvalidArgument, "no active circle points");
  for (int j = 0; j < n; ++j)
    if (active[static_cast<std::size_t>(j)]) w[static_cast<std::size_t>(j)] = 1.0 / n_active;

  std::vector<Complex> buf(static_cast<std::size_t>(n));
  std::vector<Complex> spec(static_cast<std::size_t>(n));
  auto evaluate = [&](const std::vector<double>& theta, std::vector<Complex>& q) {
    std::fill(spec.begin(), spec.end(), Complex(0.0));
    for (int i = 0; i < m; ++i) spec[idx(k_lo + i)] = theta[static_cast<std::size_t>(i)];
    fft.inv(q, spec);
    for (Complex& v : q) v *= static_cast<double>(n);
  };
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  auto objective = [&](const std::vector<double>& theta) {
    std::vector<Complex> q;
    evaluate(theta, q);
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      const std::size_t u = static_cast<std::size_t>(j);
      g[u] = std::norm(x[u] - q[u]) + c[u];
      if (active[u]) worst = std::max(worst, g[u]);
    }
    return std::sqrt(worst);
  };

  MinimaxResult best;
  best.q.k_lo = k_lo;
  best.q.theta.assign(static_cast<std::size_t>(m), 0.0);
  if (warm) {
    for (int i = 0; i < static_cast<int>(warm->theta.size()); ++i) {
      const int k = warm->k_lo + i;
      if (k >= k_lo && k <= k_hi) best.q.theta[static_cast<std::size_t>(k - k_lo)] = warm->theta[static_cast<std::size_t>(i)];
    }
  }
  best.sampled = objective(best.q.theta);
  if (warm) {
    // start the weights from the warm residual profile
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      if (active[static_cast<std::size_t>(j)]) s += (w[static_cast<std::size_t>(j)] = std::sqrt(g[static_cast<std::size_t>(j)]));
    if (s > 0.0)
      for (double& v : w) v /= s;
  }

  int stale = 0;
  std::vector<double> theta(static_cast<std::size_t>(m));
  for (int it = 0; it < cfg.max_iter && stale < cfg.patience; ++it) {
    std::vector<Complex> wc(w.begin(), w.end());
    fft.inv(buf, wc);
    for (Complex& v : buf) v *= static_cast<double>(n);  // W_m = sum_j w_j e^{i m phi_j}
    for (int j = 0; j < n; ++j) wc[static_cast<std::size_t>(j)] *= x[static_cast<std::size_t>(j)];
    fft.fwd(spec, wc);  // sum_j w_j x_j e^{-i k phi_j}
    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd rhs(m);
    for (int a = 0; a < m; ++a) {
      rhs(a) = spec[idx(k_lo + a)].real();
      for (int b = 0; b < m; ++b) gram(a, b) = buf[idx(b - a)].real();
    }
    gram.diagonal().array() += 1e-13 * gram.diagonal().maxCoeff();
    const Eigen::VectorXd sol = gram.ldlt().solve(rhs);
    if (!sol.allFinite()) throw Error(ErrorCode::SolverStall, "weighted least-squares step produced non-finite values");
    for (int a = 0; a < m; ++a) theta[static_cast<std::size_t>(a)] = sol(a);
    const double val = objective(theta);
    best.iterations = it + 1;
    if (val < best.sampled * (1.0 - 1e-10)) {
      best.sampled = val;
      best.q.theta = theta;
      stale = 0;
    } else {
      ++stale;
    }
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const std::size_t u = static_cast<std::size_t>(j);
      if (!active[u]) continue;
      w[u] *= std::pow(std::sqrt(g[u]), cfg.exponent);
      s += w[u];
    }
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::SolverStall, "Lawson weights degenerated");
    for (double& v : w) v = std::max(v / s, 1e-300);
  }
  return best;
}

/// The two components of a graph symbol.
struct Column {
  LineElement top;
  LineElement bottom;
};

struct ResidualSup {
  double value = 0.0;      // sampled sup
  double certified = 0.0;  // rigorous upper bound
};

/// Certified sup over y of the Euclidean norm of g1(iy) - g2(iy) q(z(iy)).
/// First- and second-order cell bounds from element curvature bounds and
/// coefficient moments of q; an almost-periodic limit closes the tail. An
/// exhausted budget leaves the largest open cell bound as the certificate.
inline ResidualSup residual_sup(const Column& g1_in, const Column& g2_in, const CircleSeries& q, double tol,
                                std::size_t budget = 400'000) {
  // a delay common to one component of both columns only rotates that
  // component's phase; removing it keeps |residual| and its oscillation out
  // of the cell bounds
  Column g1 = g1_in;
  Column g2 = g2_in;
  auto unshift = [](LineElement& a, LineElement& b) {
    const double t = std::min(detail::min_shift(a), detail::min_shift(b));
    if (std::isfinite(t) && t != 0.0) {
      a = a * LineElement::atom(1.0, -t);
      b = b * LineElement::atom(1.0, -t);
    }
  };
  unshift(g1.top, g2.top);
  unshift(g1.bottom, g2.bottom);
  const double q0 = q.l1();
  const double q1 = q.moment(1);
  const double q2 = q.moment(2);
  const Complex qinf = q.at_z(Complex(1.0));
  if (std::abs(qinf.imag()) > 1e-12 * (1.0 + std::abs(qinf))) throw Error(ErrorCode::InvalidArgument, "q must be real");

  auto resid = [&](double y, Complex& r1, Complex& r2) {
    const Complex qz = q.at_z(CircleSeries::cayley(y));
    r1 = g1.top.eval(y) - g2.top.eval(y) * qz;
    r2 = g1.bottom.eval(y) - g2.bottom.eval(y) * qz;
  };
  auto val = [&](double y) {
    Complex r1, r2;
    resid(y, r1, r2);
    return std::sqrt(std::norm(r1) + std::norm(r2));
  };

  // tail beyond big_y: almost-periodic limit of the residual plus decaying parts
  const LineElement ap_top = g1.top.ap_part() - g2.top.ap_part().scaled(qinf.real());
  const LineElement ap_bot = g1.bottom.ap_part() - g2.bottom.ap_part().scaled(qinf.real());
  const double ap_val = std::hypot(ap_sup(ap_top.atoms()).upper, ap_sup(ap_bot.atoms()).upper);
  const double g2_ap = g2.top.atom_l1() + g2.bottom.atom_l1();
  double big_y = 100.0 * (1.0 + std::max({g1.top.max_pole_modulus(), g1.bottom.max_pole_modulus(),
                                          g2.top.max_pole_modulus(), g2.bottom.max_pole_modulus()}));
  auto tail = [&](double yy) {
    const double t1 = detail::terms_tail(g1.top, yy) + detail::terms_tail(g1.bottom, yy);
    const double t2 = detail::terms_tail(g2.top, yy) + detail::terms_tail(g2.bottom, yy);
    // |q(z) - q(1)| <= q1 |z - 1| and |z - 1| = 2 / |iy + 1|
    return t1 + t2 * q0 + (g2_ap + t2) * q1 * 2.0 / yy;
  };
  while (tail(big_y) > 0.25 * tol && big_y < 1e13) big_y *= 2.0;
  const double tail_up = ap_val + tail(big_y);

  auto up = [&](double a, double b, double v) {
    const auto b1t = detail::local_bound(g1.top, a, b);
    const auto b1b = detail::local_bound(g1.bottom, a, b);
    const auto b2t = detail::local_bound(g2.top, a, b);
    const auto b2b = detail::local_bound(g2.bottom, a, b);
    const double g2sup = g2.top.atom_l1() + b2t.terms_sup + g2.bottom.atom_l1() + b2b.terms_sup;
    const double g2lip = b2t.lipschitz + b2b.lipschitz;
    const double g2cur = b2t.curvature + b2b.curvature;
    const double lo = std::min(std::abs(a), std::abs(b));
    const double dz = 2.0 / (1.0 + lo * lo);
    const double ddz = 4.0 / std::pow(1.0 + lo * lo, 1.5);
    const double lip = b1t.lipschitz + b1b.lipschitz + g2lip * q0 + g2sup * q1 * dz;
    const double cur = b1t.curvature + b1b.curvature + g2cur * q0 + 2.0 * g2lip * q1 * dz +
                       g2sup * (q2 * dz * dz + q1 * ddz);
    const double m = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    // derivative of the residual at the midpoint
    const Complex z = CircleSeries::cayley(m);
    const Complex qz = q.at_z(z);
    const Complex dq = q.dz(z) * Complex(0.0, 2.0) / (Complex(1.0, m) * Complex(1.0, m));
    const Complex r1 = g1.top.eval(m) - g2.top.eval(m) * qz;
    const Complex r2 = g1.bottom.eval(m) - g2.bottom.eval(m) * qz;
    const Complex d1 = g1.top.derivative(m) - g2.top.derivative(m) * qz - g2.top.eval(m) * dq;
    const Complex d2 = g1.bottom.derivative(m) - g2.bottom.derivative(m) * qz - g2.bottom.eval(m) * dq;
    const double beta = std::abs((std::conj(r1) * d1 + std::conj(r2) * d2).real());
    const double alpha = std::norm(d1) + std::norm(d2);
    const double second = std::sqrt(std::norm(r1) + std::norm(r2) + 2.0 * beta * r + alpha * r * r) + 0.5 * cur * r * r;
    return std::min(v + lip * r, second);
  };

  const double s = 1.0 / 16.0;
  auto res = bb::maximize(val, up, bb::geometric_edges(s, big_y), tol, budget, 0.0, 0.0, false);
  ResidualSup out;
  out.value = std::max(res.value, ap_val);
  out.certified = std::max({res.certified, tail_up, out.value});
  return out;
}

}  // namespace nugap
