#pragma once

// Summation of the alternating correction series sum_m g(m) with the
// majorant-aware stopping rule and even/odd truncation bounds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hcn/specfun.hpp"

namespace hcn {

struct SeriesControl {
  double epsilon = 1e-10;
  int max_terms = 10000;
};

struct GTermTrace {
  int m = 0;
  double g_m = 0.0;
  double majorant = 0.0;
  double partial_sum = 0.0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// ln of (A/eta)^m / ceil(2m/alpha)!. Rises then falls when A/eta > 1, which
/// locates the hump. Not a strict bound on |g(m)|; (A/eta)^m / Gamma(1+2m/alpha) is.
inline double log_majorant(double a_over_eta, double alpha, int m) {
  if (m == 0) return 0.0;
  if (a_over_eta == 0.0) return -std::numeric_limits<double>::infinity();
  const double k = std::ceil(2.0 * m / alpha);
  return m * std::log(a_over_eta) - log_gamma(k + 1.0);
}

struct SeriesOutcome {
  double sum = 0.0;        // S_M, M = terms
  double even_sum = 0.0;   // S_2k, 2k = terms rounded up to even
  double odd_sum = 0.0;    // S_(2k-1)
  int terms = 0;
  bool converged = false;
  double max_abs_term = 0.0;
};

/// Sums g(1), g(2), ... until |g(m)| < epsilon while the majorant is falling.
/// One extra term (not traced) is evaluated when needed so the bracketing partial sums
/// S_(2k-1) and S_2k are both available.
template <typename TermFn>
SeriesOutcome sum_correction_series(TermFn&& g, double a_over_eta, double alpha, const SeriesControl& ctl,
                                    std::vector<GTermTrace>* trace = nullptr) {
  SeriesOutcome out;
  if (a_over_eta == 0.0) {
    out.converged = true;
    return out;
  }
  CompensatedSum acc;
  double prev_log_major = log_majorant(a_over_eta, alpha, 0);
  double previous_partial = 0.0;
  int m = 1;
  for (; m <= ctl.max_terms; ++m) {
    const double gm = g(m);
    previous_partial = acc.value();
    acc.add(gm);
    out.max_abs_term = std::max(out.max_abs_term, std::abs(gm));
    const double log_major = log_majorant(a_over_eta, alpha, m);
    if (trace) trace->push_back({m, gm, std::exp(log_major), acc.value()});
    const bool falling = log_major < prev_log_major;
    prev_log_major = log_major;
    if (std::abs(gm) < ctl.epsilon && falling) {
      out.converged = true;
      break;
    }
  }
  out.terms = std::min(m, ctl.max_terms);
  out.sum = acc.value();
  if (out.terms % 2 == 0) {
    out.even_sum = out.sum;
    out.odd_sum = previous_partial;
  } else {
    out.odd_sum = out.sum;
    acc.add(g(out.terms + 1));
    out.even_sum = acc.value();
  }
  return out;
}

}  // namespace hcn
