#pragma once

// Exact coverage probability of load-aware K-tier networks: the fully loaded
// base term, the correction series sum_m g(m), truncation bounds and the
// closed-form special cases.

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "hcn/errors.hpp"
#include "hcn/model.hpp"
#include "hcn/series.hpp"
#include "hcn/specfun.hpp"

namespace hcn {

struct CoverageResult {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int terms_used = 0;
  double a_over_eta = 0.0;
  bool converged = false;
  // Largest |g(m)| seen. Cancellation costs about max_abs_term * 1e-16 of accuracy.
  double max_abs_term = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

// (-x)^m { 1/Gamma(1+2m/a) - b_over_eta * pi Gamma(1+2/a) / Gamma(1+2(m+1)/a) },
// evaluated in log space so large m neither overflows nor underflows early.
inline double correction_term(double x, double alpha, int m, double b_over_eta) {
  if (x == 0.0) return 0.0;
  const double d = 2.0 / alpha;
  const double lg_m = log_gamma(1.0 + d * m);
  const double lg_m1 = log_gamma(1.0 + d * (m + 1));
  const double pi_gamma = std::numbers::pi * std::exp(log_gamma(1.0 + d));
  const double bracket = 1.0 - b_over_eta * pi_gamma * std::exp(lg_m - lg_m1);
  const double magnitude = std::exp(m * std::log(x) - lg_m);
  return (m % 2 == 0 ? magnitude : -magnitude) * bracket;
}

inline double fully_loaded_value(const Network& net) {
  const double d = 2.0 / net.alpha;
  double num = 0.0;
  for (std::size_t i : net.access) {
    const auto& t = net.tiers[i];
    num += t.activity * tier_weight(t, net.alpha) * std::pow(t.target_sir, -d);
  }
  double den = 0.0;
  for (const auto& t : net.tiers) den += t.activity * tier_weight(t, net.alpha);
  return std::numbers::pi / interference_constant(net.alpha) * num / den;
}

inline CoverageResult finish(double base, double a_over_eta, const SeriesOutcome& s,
                             std::vector<std::string> warnings) {
  CoverageResult r;
  r.value = base - s.sum;
  r.a_over_eta = a_over_eta;
  r.terms_used = s.terms;
  r.max_abs_term = s.max_abs_term;
  if (s.terms == 0) {
    r.lower = r.upper = r.value;
  } else {
    r.lower = base - s.even_sum;
    r.upper = base - s.odd_sum;
  }
  r.converged = s.converged;
  if (!s.converged) warnings.push_back("series hit the term cap before meeting epsilon");
  if (r.value < 0.0 || r.value > 1.0) {
    r.converged = false;
    warnings.push_back("coverage value outside [0, 1]; inputs violate the model assumptions");
  }
  if (r.max_abs_term * 1e-16 > 1e-8) {
    warnings.push_back("series terms reach " + std::to_string(r.max_abs_term) +
                       "; cancellation limits absolute accuracy");
  }
  r.warnings = std::move(warnings);
  return r;
}

}  // namespace detail

/// Laplace transform of the active-field interference, E[exp(-s I)].
inline double laplace_interference(const Network& net, double s) {
  if (!(s >= 0.0)) throw DomainError("laplace_interference: s must be >= 0");
  return std::exp(-derived_constants(net).eta * std::pow(s, 2.0 / net.alpha));
}

/// g(m) for the network's access set (g_c(m) under closed access).
inline double g_term(const Network& net, int m, EtaScope scope = EtaScope::all_tiers) {
  if (m < 1) throw DomainError("g_term: m must be >= 1");
  const auto k = derived_constants(net, scope);
  if (k.a == 0.0) return 0.0;
  return detail::correction_term(k.a_over_eta(), net.alpha, m, big_b_term(net, m) / k.eta);
}

/// g(1) and g(2) in closed form for alpha = 4.
inline std::pair<double, double> g1_g2_closed_form_alpha4(const Network& net) {
  if (net.alpha != 4.0) throw PreconditionError("g1_g2_closed_form_alpha4 requires alpha == 4");
  constexpr double pi = std::numbers::pi;
  const auto k = derived_constants(net);
  const double x = k.a_over_eta();
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i : net.access) {
    const auto& t = net.tiers[i];
    const double lead = t.density * t.activity * std::sqrt(t.power);
    const double b = t.target_sir;
    s1 += lead / (std::sqrt(b) * (std::sqrt(b) + std::sqrt(1.0 + b)));
    s2 += lead * (1.0 / std::sqrt(b) - std::asin(1.0 / std::sqrt(1.0 + b)));
  }
  const double g1 = -x * (2.0 / std::sqrt(pi) - pi * std::sqrt(pi) / k.eta * s1);
  const double g2 = x * x * (1.0 - 2.0 * pi / k.eta * s2);
  return {g1, g2};
}

/// Base term: coverage with the interference field thinned to densities
/// p_i lambda_i and no idle candidates.
inline CoverageResult coverage_fully_loaded(const Network& net) {
  auto v = validate(net);
  CoverageResult r;
  r.value = r.lower = r.upper = detail::fully_loaded_value(net);
  r.a_over_eta = derived_constants(net).a_over_eta();
  r.converged = r.value >= 0.0 && r.value <= 1.0;
  r.warnings = std::move(v.warnings);
  if (!r.converged) r.warnings.push_back("coverage value outside [0, 1]; inputs violate the model assumptions");
  return r;
}

/// Exact coverage probability: base term minus the correction series.
inline CoverageResult coverage(const Network& net, const SeriesControl& ctl = {},
                               EtaScope scope = EtaScope::all_tiers, std::vector<GTermTrace>* trace = nullptr) {
  auto v = validate(net);
  const auto k = derived_constants(net, scope);
  const double x = k.a_over_eta();
  const auto s = sum_correction_series(
      [&](int m) { return detail::correction_term(x, net.alpha, m, big_b_term(net, m) / k.eta); }, x, net.alpha,
      ctl, trace);
  return detail::finish(detail::fully_loaded_value(net), x, s, std::move(v.warnings));
}

/// Even/odd truncation bounds: base - S_2m <= Pc <= base - S_(2m-1).
inline std::pair<double, double> coverage_bounds(const Network& net, int m) {
  if (m < 1) throw DomainError("coverage_bounds: m must be >= 1");
  validate(net);
  const double base = detail::fully_loaded_value(net);
  const auto k = derived_constants(net);
  if (k.a == 0.0) return {base, base};
  CompensatedSum acc;
  for (int i = 1; i < 2 * m; ++i) {
    acc.add(detail::correction_term(k.a_over_eta(), net.alpha, i, big_b_term(net, i) / k.eta));
  }
  const double odd = acc.value();
  acc.add(detail::correction_term(k.a_over_eta(), net.alpha, 2 * m, big_b_term(net, 2 * m) / k.eta));
  return {base - acc.value(), base - odd};
}

/// Smallest m with |g(m)| < epsilon on the falling side of the majorant.
inline int truncation_terms(const Network& net, double epsilon, int max_terms = 10000) {
  if (!(epsilon > 0.0)) throw DomainError("truncation_terms: epsilon must be > 0");
  validate(net);
  const auto k = derived_constants(net);
  const double x = k.a_over_eta();
  double prev = log_majorant(x, net.alpha, 0);
  for (int m = 1; m <= max_terms; ++m) {
    const double gm = k.a == 0.0 ? 0.0 : detail::correction_term(x, net.alpha, m, big_b_term(net, m) / k.eta);
    const double major = log_majorant(x, net.alpha, m);
    if (std::abs(gm) < epsilon && major < prev) return m;
    prev = major;
  }
  throw ConvergenceError("truncation_terms: no admissible m within " + std::to_string(max_terms) + " terms");
}

/// Activity factor above which a tier with target SIR beta keeps A/eta < 1.
inline double convergence_threshold(double beta, double alpha) {
  if (!(beta > 0.0)) throw DomainError("convergence_threshold: beta must be > 0");
  const double c = interference_constant(alpha);
  const double pi_gamma = std::numbers::pi * std::exp(log_gamma(1.0 + 2.0 / alpha));
  return 1.0 / (1.0 + c * std::pow(beta, 2.0 / alpha) / pi_gamma);
}

/// Single-tier open-access coverage. Independent of power and density.
inline CoverageResult coverage_single_tier(double power, double density, double beta, double p, double alpha,
                                           const SeriesControl& ctl = {}) {
  const auto v = validate(Network::open(alpha, {Tier{power, density, beta, p}}));
  const double d = 2.0 / alpha;
  const double c = interference_constant(alpha);
  const double pi_gamma = std::numbers::pi * std::exp(log_gamma(1.0 + d));
  const double x = pi_gamma * (1.0 - p) / (c * p * std::pow(beta, d));
  const auto s = sum_correction_series(
      [&](int m) {
        const double b_over_eta = big_b_kernel(beta, alpha, m) / c;
        return detail::correction_term(x, alpha, m, b_over_eta);
      },
      x, alpha, ctl);
  return detail::finish(std::numbers::pi * std::pow(beta, -d) / c, x, s, v.warnings);
}

/// Coverage when every tier shares one target SIR. Under open access with a
/// common activity factor this equals the single-tier value.
inline CoverageResult coverage_same_beta(const Network& net, const SeriesControl& ctl = {}) {
  auto v = validate(net);
  const double beta = net.tiers.front().target_sir;
  for (const auto& t : net.tiers) {
    if (t.target_sir != beta) throw PreconditionError("coverage_same_beta requires equal target SIRs");
  }
  const double d = 2.0 / net.alpha;
  const double c = interference_constant(net.alpha);
  const double pi_gamma = std::numbers::pi * std::exp(log_gamma(1.0 + d));
  double idle = 0.0;
  double active_access = 0.0;
  for (std::size_t i : net.access) {
    const double w = tier_weight(net.tiers[i], net.alpha);
    idle += (1.0 - net.tiers[i].activity) * w;
    active_access += net.tiers[i].activity * w;
  }
  double active = 0.0;
  for (const auto& t : net.tiers) active += t.activity * tier_weight(t, net.alpha);
  const double access_share = active_access / active;
  const double x = pi_gamma / (c * std::pow(beta, d)) * idle / active;
  const auto s = sum_correction_series(
      [&](int m) {
        const double b_over_eta = access_share * big_b_kernel(beta, net.alpha, m) / c;
        return detail::correction_term(x, net.alpha, m, b_over_eta);
      },
      x, net.alpha, ctl);
  return detail::finish(std::numbers::pi * std::pow(beta, -d) / c * access_share, x, s, std::move(v.warnings));
}

enum class TierEffect { increases, decreases, unchanged };

inline const char* to_string(TierEffect e) {
  switch (e) {
    case TierEffect::increases: return "increases";
    case TierEffect::decreases: return "decreases";
    case TierEffect::unchanged: return "unchanged";
  }
  return "?";
}

/// Effect on open-access coverage of adding new_tier to an equal-SIR network:
/// coverage rises iff the new tier is less loaded than the current effective load.
inline TierEffect tier_addition_effect(const Network& net, const Tier& new_tier) {
  validate(net);
  for (const auto& t : net.tiers) {
    if (t.target_sir != new_tier.target_sir) {
      throw PreconditionError("tier_addition_effect requires equal target SIRs");
    }
  }
  const double p_eff = effective_load(net);
  if (std::abs(new_tier.activity - p_eff) <= 1e-12) return TierEffect::unchanged;
  return new_tier.activity < p_eff ? TierEffect::increases : TierEffect::decreases;
}

/// Coverage when the active set is fixed in advance and the mobile may only
/// connect to idle BSs: 1 - sum_{m>=0} (-A/eta)^m / Gamma(1+2m/alpha).
inline CoverageResult coverage_idle_only(const Network& net, const SeriesControl& ctl = {},
                                         EtaScope scope = EtaScope::all_tiers) {
  auto v = validate(net);
  const auto k = derived_constants(net, scope);
  const double x = k.a_over_eta();
  const auto s = sum_correction_series(
      [&](int m) { return detail::correction_term(x, net.alpha, m, 0.0); }, x, net.alpha, ctl);
  // the m = 0 term cancels the leading 1
  return detail::finish(0.0, x, s, std::move(v.warnings));
}

/// g-sequence trace (m, g(m), majorant, partial sum) up to the stopping point.
inline std::vector<GTermTrace> correction_trace(const Network& net, const SeriesControl& ctl = {}) {
  std::vector<GTermTrace> trace;
  coverage(net, ctl, EtaScope::all_tiers, &trace);
  return trace;
}

}  // namespace hcn
