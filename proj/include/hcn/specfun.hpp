#pragma once

// Special-function kernels used by the coverage formulas: log-gamma, the
// Gauss hypergeometric series and the PPP interference constant C(alpha).

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "hcn/errors.hpp"

namespace hcn {

struct SeriesTolerance {
  double rel_tol = 1e-13;
  int max_terms = 500;
};

namespace detail {

// Lanczos approximation, g = 7, n = 9.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_log_gamma(double x) {
  // ln Gamma(x) for x >= 0.5
  const double z = x - 1.0;
  double acc = kLanczosCoeffs[0];
  for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i) {
    acc += kLanczosCoeffs[i] / (z + static_cast<double>(i));
  }
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(acc);
}

}  // namespace detail

/// Natural log of the gamma function for x > 0.
///
/// Relative error is below 1e-12 on [0.5, 200] away from the roots at 1 and
/// 2, where the absolute error stays below 1e-15. Both roots are returned
/// exactly.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(x));
  }
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) {
    // Gamma(x) = Gamma(x + 1) / x
    return detail::lanczos_log_gamma(x + 1.0) - std::log(x);
  }
  return detail::lanczos_log_gamma(x);
}

/// Gauss hypergeometric function 2F1(a, b; c; z) for real z in [0, 1),
/// summed from its defining power series.
inline double gauss_2f1(double a, double b, double c, double z, const SeriesTolerance& tol = {}) {
  if (!(z >= 0.0 && z < 1.0)) {
    throw DomainError("gauss_2f1: z must lie in [0, 1), got " + std::to_string(z));
  }
  if (!(c > 0.0) && c == std::floor(c)) {
    throw DomainError("gauss_2f1: c must not be a non-positive integer");
  }
  if (!(tol.rel_tol > 0.0) || tol.max_terms < 1) {
    throw DomainError("gauss_2f1: invalid series tolerance");
  }

  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < tol.max_terms; ++k) {
    const double kd = static_cast<double>(k);
    term *= (a + kd) * (b + kd) / ((c + kd) * (kd + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;
    // remainder of a series with term ratio tending to z is about |term| z / (1 - z)
    if (std::abs(term) * z <= tol.rel_tol * std::abs(sum) * (1.0 - z) && (a + kd) * (b + kd) >= 0.0) {
      return sum;
    }
  }
  throw ConvergenceError("gauss_2f1: series did not converge within " + std::to_string(tol.max_terms) +
                         " terms");
}

/// C(alpha) = 2 pi^2 csc(2 pi / alpha) / alpha, the PPP interference constant.
inline double interference_constant(double alpha) {
  if (!(alpha > 2.0) || !std::isfinite(alpha)) {
    throw DomainError("interference_constant: alpha must exceed 2, got " + std::to_string(alpha));
  }
  constexpr double pi = std::numbers::pi;
  return 2.0 * pi * pi / (alpha * std::sin(2.0 * pi / alpha));
}

}  // namespace hcn
