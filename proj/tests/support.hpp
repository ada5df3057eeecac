#pragma once

// Independent reference computations for the test suite. Nothing in here
// calls into the library's numerics except for plain data types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/Polynomials>

#include "nugap/element.hpp"
#include "nugap/factorization.hpp"

namespace oracle {

using Complex = std::complex<double>;
using nugap::Atom;
using nugap::PlantDesc;
using nugap::Poly;

inline std::vector<Complex> eigen_roots(const Poly& p) {
  if (p.degree() < 1) return {};
  Eigen::VectorXd c(p.degree() + 1);
  for (int k = 0; k <= p.degree(); ++k) c(k) = p[static_cast<std::size_t>(k)];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(c);
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) out.push_back(solver.roots()(i));
  return out;
}

inline int rhp_count(const Poly& p) {
  int n = 0;
  for (const Complex& r : eigen_roots(p)) n += r.real() > 0.0 ? 1 : 0;
  return n;
}

/// Argument principle: winding of num/den (no axis roots, proper) as y
/// increases equals #RHP poles - #RHP zeros.
inline long pole_zero_winding(const Poly& num, const Poly& den) { return rhp_count(den) - rhp_count(num); }

/// Unwrapped phase of f over the whole axis, y = tan(theta).
template <typename F>
double unwrap_turns(F&& f, int n = 200000) {
  double total = 0.0;
  Complex prev = f(std::tan(-0.5 * std::numbers::pi + 1e-9));
  for (int i = 1; i <= n; ++i) {
    const double th = -0.5 * std::numbers::pi + std::numbers::pi * i / n;
    const Complex cur = f(std::tan(std::clamp(th, -0.5 * std::numbers::pi + 1e-9, 0.5 * std::numbers::pi - 1e-9)));
    total += std::arg(cur / prev);
    prev = cur;
  }
  return total / (2.0 * std::numbers::pi);
}

/// Mean motion of sum c_k exp(-i y t_k) when every t_k is an integer
/// multiple of h: -t_min - h * (#zeros of P(w) = sum c_k w^(n_k) in |w| < 1).
inline double root_count_mean_motion(const std::vector<Atom>& atoms, double h) {
  double tmin = atoms.front().shift;
  for (const Atom& a : atoms) tmin = std::min(tmin, a.shift);
  std::vector<double> c;
  for (const Atom& a : atoms) {
    const auto k = static_cast<std::size_t>(std::lround((a.shift - tmin) / h));
    if (c.size() <= k) c.resize(k + 1, 0.0);
    c[k] += a.coeff;
  }
  int inside = 0;
  for (const Complex& r : eigen_roots(Poly(c))) inside += std::abs(r) < 1.0 ? 1 : 0;
  return -tmin - h * inside;
}

/// Hankel norm of a stable strictly proper num/den from the controllability
/// and observability gramians.
inline double gramian_hankel_norm(const Poly& num, const Poly& den) {
  const int n = den.degree();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(n);
  const double lead = den.lead();
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  for (int k = 0; k < n; ++k) a(n - 1, k) = -den[static_cast<std::size_t>(k)] / lead;
  b(n - 1) = 1.0;
  for (int k = 0; k < n; ++k) c(k) = num[static_cast<std::size_t>(k)] / lead;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  // A X + X A^T = -R  <=>  (I kron A + A kron I) vec X = -vec R
  auto lyap = [&](const Eigen::MatrixXd& m, const Eigen::MatrixXd& r) {
    Eigen::MatrixXd k = Eigen::kroneckerProduct(id, m) + Eigen::kroneckerProduct(m, id);
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(r.data(), n * n);
    Eigen::VectorXd x = k.fullPivLu().solve(rhs);
    return Eigen::MatrixXd(Eigen::Map<Eigen::MatrixXd>(x.data(), n, n));
  };
  const Eigen::MatrixXd p = lyap(a, b * b.transpose());
  const Eigen::MatrixXd q = lyap(a.transpose(), c.transpose() * c);
  Eigen::EigenSolver<Eigen::MatrixXd> es(p * q);
  double m = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) m = std::max(m, es.eigenvalues()(i).real());
  return std::sqrt(m);
}

/// Pointwise chordal distance between two plants.
inline double chordal(const PlantDesc& p1, const PlantDesc& p2, double y) {
  const Complex a = p1.eval(y);
  const Complex b = p2.eval(y);
  return std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
}

/// Dense log grid plus local golden refinement.
inline double chordal_sup_dense(const PlantDesc& p1, const PlantDesc& p2) {
  std::vector<double> ys{0.0};
  for (int i = 0; i <= 24000; ++i) ys.push_back(std::pow(10.0, -4.0 + 8.0 * i / 24000.0));
  double best = 0.0;
  std::size_t bi = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double v = chordal(p1, p2, ys[i]);
    if (v > best) best = v, bi = i;
  }
  double lo = ys[bi == 0 ? 0 : bi - 1];
  double hi = ys[std::min(bi + 1, ys.size() - 1)];
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (chordal(p1, p2, m1) < chordal(p1, p2, m2))
      lo = m1;
    else
      hi = m2;
  }
  return std::max(best, chordal(p1, p2, 0.5 * (lo + hi)));
}

// ---------------------------------------------------------------------------
// Two-block directed gap by gamma iteration on the disc.

struct GraphSamples {
  std::vector<Complex> n, d;  // normalized graph symbol on the circle grid
};

/// Stable spectral factor of a(s)a(-s) + b(s)b(-s) with positive leading coefficient.
inline Poly lhp_factor(const Poly& a, const Poly& b) {
  auto mirror = [](const Poly& p) {
    std::vector<double> c = p.coeffs();
    for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
    return Poly(c);
  };
  const Poly e = a * mirror(a) + b * mirror(b);
  std::vector<Complex> roots;
  for (const Complex& r : eigen_roots(e))
    if (r.real() < 0.0) roots.push_back(r);
  std::vector<Complex> acc{1.0};
  for (const Complex& r : roots) {
    std::vector<Complex> nxt(acc.size() + 1, 0.0);
    for (std::size_t k = 0; k < acc.size(); ++k) {
      nxt[k + 1] += acc[k];
      nxt[k] -= r * acc[k];
    }
    acc = nxt;
  }
  std::vector<double> c;
  const double scale = std::sqrt(std::abs(e.lead()));
  for (const Complex& z : acc) c.push_back(scale * z.real());
  return Poly(c);
}

inline GraphSamples graph_samples(const PlantDesc& p, int n) {
  const Poly chi = lhp_factor(p.den, p.num);
  GraphSamples g;
  g.n.resize(static_cast<std::size_t>(n));
  g.d.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (j == 0) {
      // y -> infinity
      const int dc = chi.degree();
      const double nb = p.num.degree() == dc ? p.num.lead() / chi.lead() : 0.0;
      const double na = p.den.degree() == dc ? p.den.lead() / chi.lead() : 0.0;
      g.n[0] = nb;
      g.d[0] = na;
      continue;
    }
    const double y = 1.0 / std::tan(std::numbers::pi * j / n);
    const Complex s(0.0, y);
    const Complex x = chi(s);
    g.n[static_cast<std::size_t>(j)] = p.num(s) / x;
    g.d[static_cast<std::size_t>(j)] = p.den(s) / x;
  }
  return g;
}

inline double hankel_norm_of_samples(const std::vector<Complex>& f) {
  const int n = static_cast<int>(f.size());
  Eigen::FFT<double> fft;
  std::vector<Complex> c;
  fft.fwd(c, f);
  for (Complex& v : c) v /= static_cast<double>(n);
  auto neg = [&](int k) { return c[static_cast<std::size_t>(n - k)]; };  // c_{-k}
  double cmax = 0.0;
  for (int k = 1; k < n / 2; ++k) cmax = std::max(cmax, std::abs(neg(k)));
  if (cmax == 0.0) return 0.0;
  int m = 1;
  for (int k = 1; k < n / 4; ++k)
    if (std::abs(neg(k)) > 1e-14 * cmax) m = k;
  m = std::min(m, 384);
  Eigen::MatrixXcd h(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) h(j, k) = j + k + 1 < n / 2 ? neg(j + k + 1) : Complex(0.0);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(h);
  return svd.singularValues()(0);
}

/// inf over stable q of sup |G1 - G2 q| for delay-free plants:
/// two-block Nehari problem [R - q; S] with R = G2^H G1, S = G2~ G1,
/// solved by bisection on gamma with an outer spectral factor from the cepstrum.
inline double directed_gap_gamma(const PlantDesc& p1, const PlantDesc& p2, int n = 1 << 14, int iters = 44) {
  const GraphSamples g1 = graph_samples(p1, n);
  const GraphSamples g2 = graph_samples(p2, n);
  std::vector<Complex> r(static_cast<std::size_t>(n));
  double smax = 0.0;
  std::vector<double> s2(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < r.size(); ++j) {
    r[j] = std::conj(g2.n[j]) * g1.n[j] + std::conj(g2.d[j]) * g1.d[j];
    const Complex s = -g2.d[j] * g1.n[j] + g2.n[j] * g1.d[j];
    s2[j] = std::norm(s);
    smax = std::max(smax, std::abs(s));
  }
  Eigen::FFT<double> fft;
  auto feasible = [&](double gamma) {
    std::vector<Complex> lg(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) lg[j] = 0.5 * std::log(gamma * gamma - s2[j]);
    std::vector<Complex> c;
    fft.fwd(c, lg);
    // analytic h with Re h = lg: c_0 + 2 sum_{k > 0} c_k z^k
    for (int k = 1; k < n / 2; ++k) c[static_cast<std::size_t>(k)] *= 2.0;
    for (int k = n / 2 + 1; k < n; ++k) c[static_cast<std::size_t>(k)] = 0.0;
    std::vector<Complex> h;
    fft.inv(h, c);
    std::vector<Complex> ratio(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) ratio[j] = r[j] / std::exp(h[j]);
    return hankel_norm_of_samples(ratio) <= 1.0;
  };
  double lo = smax;
  double hi = 1.0;
  if (!feasible(hi)) return 1.0;
  for (int it = 0; it < iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace oracle

namespace corpus {

using nugap::Complex;
using nugap::PlantDesc;
using nugap::Poly;

inline Poly random_poly(std::mt19937_64& rng, int deg, double lead) {
  std::uniform_real_distribution<double> re(0.2, 3.0), im(0.3, 3.0), coin(0.0, 1.0);
  std::vector<Complex> roots;
  while (static_cast<int>(roots.size()) < deg) {
    const double sign = coin(rng) < 0.5 ? -1.0 : 1.0;
    if (deg - static_cast<int>(roots.size()) >= 2 && coin(rng) < 0.4) {
      const Complex z(sign * re(rng), im(rng));
      roots.push_back(z);
      roots.push_back(std::conj(z));
    } else {
      roots.emplace_back(sign * re(rng), 0.0);
    }
  }
  return nugap::poly_from_roots(roots, lead);
}

/// Random plant of degree <= max_deg, poles and zeros off the axis.
inline PlantDesc random_plant(std::mt19937_64& rng, int max_deg = 4, double max_tau = 0.0) {
  std::uniform_int_distribution<int> dd(0, max_deg);
  std::uniform_real_distribution<double> gain(0.5, 2.0), coin(0.0, 1.0), tau(0.0, max_tau);
  PlantDesc p;
  const int n = dd(rng);
  const int m = std::uniform_int_distribution<int>(0, n)(rng);
  p.den = random_poly(rng, n, 1.0);
  p.num = random_poly(rng, m, (coin(rng) < 0.5 ? -1.0 : 1.0) * gain(rng));
  p.tau = max_tau > 0.0 ? tau(rng) : 0.0;
  p.validate();
  return p;
}

/// Nearby plant: gain and pole perturbations of relative size eps.
inline PlantDesc perturb(const PlantDesc& p, std::mt19937_64& rng, double eps) {
  std::uniform_real_distribution<double> u(-eps, eps);
  PlantDesc q = p;
  q.num = p.num.scaled(1.0 + u(rng));
  std::vector<double> c = p.den.coeffs();
  for (std::size_t k = 0; k + 1 < c.size(); ++k) c[k] *= 1.0 + u(rng);
  q.den = Poly(c);
  q.validate();
  return q;
}

inline PlantDesc plant(std::vector<double> num, std::vector<double> den, double tau = 0.0) {
  PlantDesc p;
  p.num = Poly(std::move(num));
  p.den = Poly(std::move(den));
  p.tau = tau;
  p.validate();
  return p;
}

/// Invertible element AP * R with a two-atom AP part on the lattice 0.5 Z
/// and an allpass-like rational factor R; `t` deforms it continuously
/// without losing invertibility.
struct InvertibleSample {
  std::vector<nugap::Atom> ap;
  Poly num, den;

  nugap::LineElement at(double t = 0.0) const {
    std::vector<nugap::Atom> a = ap;
    a[0].coeff *= 1.0 + 0.5 * t;
    std::vector<double> n = num.coeffs();
    for (std::size_t k = 0; k + 1 < n.size(); ++k) n[k] *= std::pow(1.0 + t, static_cast<double>(n.size() - 1 - k));
    return nugap::LineElement(a, {}) * nugap::LineElement::rational(Poly(n), den);
  }
  double expected_motion() const { return oracle::root_count_mean_motion(ap, 0.5); }
  long expected_winding() const { return oracle::pole_zero_winding(num, den); }
};

inline InvertibleSample random_invertible(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> shift(0, 4), nf(0, 2);
  std::uniform_real_distribution<double> mag(0.4, 1.5), ratio(1.6, 3.0), re(0.3, 2.0), coin(0.0, 1.0);
  InvertibleSample s;
  const double big = mag(rng);
  double t0 = 0.5 * shift(rng);
  double t1 = 0.5 * shift(rng);
  if (t1 == t0) t1 += 0.5;
  const double sign = coin(rng) < 0.5 ? -1.0 : 1.0;
  // dominant atom first so the path in at() keeps dominance
  s.ap = {{big, t0}, {sign * big / ratio(rng), t1}};
  std::vector<Complex> zeros, poles;
  const int k = nf(rng);
  for (int i = 0; i < k; ++i) {
    zeros.emplace_back((coin(rng) < 0.5 ? -1.0 : 1.0) * re(rng), 0.0);
    poles.emplace_back(-re(rng), 0.0);
  }
  s.num = nugap::poly_from_roots(zeros);
  s.den = nugap::poly_from_roots(poles);
  return s;
}

}  // namespace corpus
