#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include "nugap/element.hpp"
#include "nugap/error.hpp"
#include "nugap/index.hpp"

namespace nugap {

/// Samples of a line symbol on N uniform circle points z_j = exp(2 pi i j / N),
/// pulled back through z = (s - 1) / (s + 1), i.e. y_j = cot(phi_j / 2).
/// Increasing y runs clockwise around the circle; j = 0 is y = infinity.
struct CircleSymbol {
  std::vector<Complex> samples;
  std::vector<Complex> coeffs;  // Fourier coefficients, c_k at index k mod N
  double tail = 0.0;            // max |c_k| over N/4 <= |k| <= N/2

  int size() const { return static_cast<int>(samples.size()); }
  Complex coeff(int k) const {
    const int n = size();
    return coeffs[static_cast<std::size_t>(((k % n) + n) % n)];
  }
};

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

inline CircleSymbol cayley_samples(const LineElement& f, int n) {
  if (n < 64 || !is_power_of_two(n)) throw Error(ErrorCode::InvalidArgument, "circle grid must be a power of two >= 64");
  if (!f.delay_free()) throw Error(ErrorCode::DelaySymbol, "circle numerics need a delay-free symbol");
  CircleSymbol sym;
  sym.samples.resize(static_cast<std::size_t>(n));
  double c0 = 0.0;
  for (const Atom& a : f.atoms()) c0 += a.coeff;
  sym.samples[0] = Complex(c0);
  for (int j = 1; j < n; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / n;
    sym.samples[static_cast<std::size_t>(j)] = f.eval(1.0 / std::tan(0.5 * phi));
  }
  Eigen::FFT<double> fft;
  fft.fwd(sym.coeffs, sym.samples);
  for (Complex& c : sym.coeffs) c /= static_cast<double>(n);
  for (int k = n / 4; k <= n / 2; ++k) sym.tail = std::max({sym.tail, std::abs(sym.coeff(k)), std::abs(sym.coeff(-k))});
  return sym;
}

/// Smallest power-of-two grid (>= n_min) whose coefficient tail is below tol.
inline CircleSymbol cayley_samples_adaptive(const LineElement& f, int n_min, double tol = 1e-8, int n_max = 1 << 18) {
  int n = std::max(64, n_min);
  while (true) {
    CircleSymbol s = cayley_samples(f, n);
    if (s.tail <= tol) return s;
    if (n >= n_max) throw Error(ErrorCode::Aliasing, "Fourier coefficient tail stays above tolerance");
    n *= 2;
  }
}

struct FiniteSection {
  int order = 0;
  Eigen::MatrixXd entries;  // T[j][k] = c_{j-k}
  double aliasing_tail = 0.0;
};

inline FiniteSection finite_section(const CircleSymbol& sym, int order, double tail_tol = 1e-8) {
  if (order < 1 || 4 * order > sym.size()) throw Error(ErrorCode::InvalidArgument, "finite section order must be <= N/4");
  if (sym.tail > tail_tol) throw Error(ErrorCode::Aliasing, "Fourier coefficient tail exceeds tolerance");
  FiniteSection fs;
  fs.order = order;
  fs.aliasing_tail = sym.tail;
  fs.entries.resize(order, order);
  // real-coefficient symbols have real Fourier coefficients
  for (int j = 0; j < order; ++j)
    for (int k = 0; k < order; ++k) fs.entries(j, k) = sym.coeff(j - k).real();
  return fs;
}

struct SectionRow {
  int order = 0;
  double sigma_min = 0.0;
  int small_count = 0;
};

struct ToeplitzReport {
  long winding = 0;
  std::vector<SectionRow> rows;
  std::string verdict;
  int grid = 0;
};

inline constexpr double kSmallSigma = 1e-4;

inline ToeplitzReport invertibility_diagnostic(const LineElement& f, const std::vector<int>& orders = {64, 128, 256, 512},
                                               const IndexConfig& cfg = {}) {
  if (orders.empty()) throw Error(ErrorCode::InvalidArgument, "empty order ladder");
  ToeplitzReport rep;
  rep.winding = relative_winding(f, cfg);
  const int top = *std::max_element(orders.begin(), orders.end());
  const CircleSymbol sym = cayley_samples_adaptive(f, 4 * top);
  rep.grid = sym.size();
  for (int order : orders) {
    const FiniteSection fs = finite_section(sym, order);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(fs.entries);
    const auto& sv = svd.singularValues();
    SectionRow row{order, sv.minCoeff(), 0};
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) < kSmallSigma) ++row.small_count;
    rep.rows.push_back(row);
  }
  std::vector<SectionRow> sorted = rep.rows;
  std::sort(sorted.begin(), sorted.end(), [](const SectionRow& a, const SectionRow& b) { return a.order < b.order; });
  const SectionRow& last = sorted.back();
  const SectionRow& prev = sorted.size() > 1 ? sorted[sorted.size() - 2] : last;
  const bool stable = last.small_count == prev.small_count;
  const long n = std::labs(rep.winding);
  if (n == 0 && stable && last.small_count == 0 && last.sigma_min >= kSmallSigma)
    rep.verdict = "CONSISTENT_INVERTIBLE";
  else if (n > 0 && stable && last.small_count == n)
    rep.verdict = "CONSISTENT_INDEX_" + std::to_string(n);
  else
    rep.verdict = "INCONSISTENT";
  return rep;
}

/// Largest singular value of the Hankel matrix H[j][k] = c_{-1-j-k} of the
/// disc symbol: the norm of the Hankel operator of the anti-analytic part.
inline double hankel_sigma(const LineElement& f, int n_min = 2048) {
  const CircleSymbol sym = cayley_samples_adaptive(f, n_min);
  const int n = sym.size();
  double cmax = 0.0;
  for (int k = 1; k < n / 2; ++k) cmax = std::max(cmax, std::abs(sym.coeff(-k)));
  if (cmax == 0.0) return 0.0;
  int m = 0;
  for (int k = 1; k < n / 4; ++k)
    if (std::abs(sym.coeff(-k)) > 1e-15 * cmax) m = k;
  if (m == 0) return 0.0;
  Eigen::MatrixXd h(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) h(j, k) = sym.coeff(-1 - j - k).real();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(h);
  return svd.singularValues()(0);
}

}  // namespace nugap
