#pragma once

// Tier and network descriptions plus the derived scalars every coverage
// formula consumes (A, eta, B(m), effective load, load calibration).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hcn/errors.hpp"
#include "hcn/specfun.hpp"

namespace hcn {

/// One class of base stations. All quantities are linear.
struct Tier {
  double power = 1.0;       // relative transmit power P_i
  double density = 1.0;     // BS per unit area
  double target_sir = 1.0;  // beta_i
  double activity = 1.0;    // p_i, probability an interfering BS transmits

  double delta() const { return target_sir / (1.0 + target_sir); }

  friend bool operator==(const Tier&, const Tier&) = default;
};

struct Network {
  double alpha = 4.0;
  std::vector<Tier> tiers;
  // 0-based indices of the tiers a mobile may connect to, sorted.
  std::vector<std::size_t> access;

  static Network open(double alpha, std::vector<Tier> tiers) {
    Network net{alpha, std::move(tiers), {}};
    net.access.resize(net.tiers.size());
    std::iota(net.access.begin(), net.access.end(), std::size_t{0});
    return net;
  }

  std::size_t size() const { return tiers.size(); }

  bool accessible(std::size_t tier) const {
    return std::binary_search(access.begin(), access.end(), tier);
  }

  bool open_access() const { return access.size() == tiers.size(); }

  friend bool operator==(const Network&, const Network&) = default;
};

/// Which tiers the active-field coefficient eta sums over under closed access.
/// all_tiers is the default: every tier interferes regardless of access rights.
enum class EtaScope { all_tiers, access_tiers };

struct DerivedConstants {
  double a = 0.0;    // idle-candidate weight A
  double eta = 0.0;  // active-field coefficient
  double c_alpha = 0.0;

  double a_over_eta() const { return a / eta; }
};

struct Validation {
  Network network;
  std::vector<std::string> warnings;
};

/// lambda P^(2/alpha), the weight a tier carries in every density functional.
inline double tier_weight(const Tier& t, double alpha) {
  return t.density * std::pow(t.power, 2.0 / alpha);
}

/// Warnings for tiers whose target SIR is at or below 0 dB. The series
/// results are exact only for beta_i > 1.
inline std::vector<std::string> sir_warnings(const Network& net) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < net.tiers.size(); ++i) {
    if (net.tiers[i].target_sir <= 1.0) {
      out.push_back("tier[" + std::to_string(i + 1) +
                    "].target_sir <= 1 (0 dB): analytic result is outside its exactness region");
    }
  }
  return out;
}

/// Checks every invariant of Network. Throws ValidationError naming the field.
inline Validation validate(const Network& net) {
  if (!(net.alpha > 2.0) || !std::isfinite(net.alpha)) {
    throw ValidationError("alpha", "path-loss exponent must exceed 2");
  }
  if (net.tiers.empty()) throw ValidationError("tiers", "at least one tier is required");
  for (std::size_t i = 0; i < net.tiers.size(); ++i) {
    const auto& t = net.tiers[i];
    const std::string prefix = "tier[" + std::to_string(i + 1) + "].";
    if (!(t.power > 0.0) || !std::isfinite(t.power)) throw ValidationError(prefix + "power", "must be > 0");
    if (!(t.density > 0.0) || !std::isfinite(t.density)) {
      throw ValidationError(prefix + "density", "must be > 0");
    }
    if (!(t.target_sir > 0.0) || !std::isfinite(t.target_sir)) {
      throw ValidationError(prefix + "target_sir", "must be > 0");
    }
    if (!(t.activity >= 0.0 && t.activity <= 1.0)) {
      throw ValidationError(prefix + "activity", "must lie in [0, 1]");
    }
  }
  if (net.access.empty()) throw ValidationError("access", "at least one tier must be accessible");
  for (std::size_t k = 0; k < net.access.size(); ++k) {
    if (net.access[k] >= net.tiers.size()) throw ValidationError("access", "tier index out of range");
    if (k > 0 && net.access[k] <= net.access[k - 1]) {
      throw ValidationError("access", "indices must be sorted and unique");
    }
  }
  double active_weight = 0.0;
  for (const auto& t : net.tiers) active_weight += t.activity * tier_weight(t, net.alpha);
  if (!(active_weight > 0.0)) {
    throw ValidationError("tiers.activity", "no tier transmits (eta = 0)");
  }
  return {net, sir_warnings(net)};
}

/// A, eta and C(alpha). A sums over the access set; eta over all tiers
/// unless scope says otherwise.
inline DerivedConstants derived_constants(const Network& net, EtaScope scope = EtaScope::all_tiers) {
  const double c = interference_constant(net.alpha);
  const double two_over_alpha = 2.0 / net.alpha;
  double idle = 0.0;
  for (std::size_t i : net.access) {
    const auto& t = net.tiers[i];
    idle += (1.0 - t.activity) * tier_weight(t, net.alpha) * std::pow(t.target_sir, -two_over_alpha);
  }
  double active = 0.0;
  for (std::size_t i = 0; i < net.tiers.size(); ++i) {
    if (scope == EtaScope::access_tiers && !net.accessible(i)) continue;
    active += net.tiers[i].activity * tier_weight(net.tiers[i], net.alpha);
  }
  const double a = std::numbers::pi * std::exp(log_gamma(1.0 + two_over_alpha)) * idle;
  return {a, c * active, c};
}

/// Per-tier summand of B(m), without the lambda p P^(2/alpha) prefactor:
/// beta^(-2/alpha) (1+beta)^(-2m/alpha) 2F1(1, 2m/alpha; 1+2(m+1)/alpha; 1/(1+beta)).
inline double big_b_kernel(double beta, double alpha, int m, const SeriesTolerance& tol = {}) {
  const double two_over_alpha = 2.0 / alpha;
  const double md = static_cast<double>(m);
  const double f = gauss_2f1(1.0, two_over_alpha * md, 1.0 + two_over_alpha * (md + 1.0), 1.0 / (1.0 + beta), tol);
  return std::pow(beta, -two_over_alpha) * std::pow(1.0 + beta, -two_over_alpha * md) * f;
}

/// B(m) summed over the access set.
inline double big_b_term(const Network& net, int m, const SeriesTolerance& tol = {}) {
  if (m < 1) throw DomainError("big_b_term: m must be >= 1");
  double sum = 0.0;
  for (std::size_t i : net.access) {
    const auto& t = net.tiers[i];
    if (t.activity == 0.0) continue;
    sum += t.activity * tier_weight(t, net.alpha) * big_b_kernel(t.target_sir, net.alpha, m, tol);
  }
  return sum;
}

/// lambda P^(2/alpha)-weighted mean activity over all tiers.
inline double effective_load(const Network& net) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& t : net.tiers) {
    const double w = tier_weight(t, net.alpha);
    num += t.activity * w;
    den += w;
  }
  return num / den;
}

struct UserLoad {
  std::vector<double> activity;        // p_j, capped at 1
  std::vector<double> served_fraction;  // fraction of users served by tier j
};

/// Activity factors implied by a user density spread over M resource blocks
/// under max-power association.
inline UserLoad activity_from_user_density(const Network& net, double user_density, int resource_blocks) {
  if (!(user_density >= 0.0)) throw DomainError("activity_from_user_density: user density must be >= 0");
  if (resource_blocks < 1) throw DomainError("activity_from_user_density: resource blocks must be >= 1");
  const double two_over_alpha = 2.0 / net.alpha;
  std::vector<double> reach(net.tiers.size());
  double total = 0.0;
  for (std::size_t j = 0; j < net.tiers.size(); ++j) {
    const auto& t = net.tiers[j];
    reach[j] = std::pow(t.power / t.target_sir, two_over_alpha);
    total += t.density * reach[j];
  }
  UserLoad out;
  for (std::size_t j = 0; j < net.tiers.size(); ++j) {
    out.served_fraction.push_back(net.tiers[j].density * reach[j] / total);
    out.activity.push_back(std::min(1.0, user_density / resource_blocks * reach[j] / total));
  }
  return out;
}

/// Copy of net with tier activities replaced.
inline Network with_activity(Network net, const std::vector<double>& activity) {
  if (activity.size() != net.tiers.size()) throw DomainError("with_activity: size mismatch");
  for (std::size_t j = 0; j < activity.size(); ++j) net.tiers[j].activity = activity[j];
  return net;
}

/// Splits a tier into an open part holding fraction f of its BSs and a closed
/// part holding the rest. Densities add back to the original.
inline std::pair<Tier, Tier> split_access_fraction(const Tier& tier, double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw DomainError("split_access_fraction: f must lie in [0, 1]");
  Tier open = tier;
  Tier closed = tier;
  open.density = f * tier.density;
  closed.density = tier.density - open.density;
  return {open, closed};
}

/// Open/closed pair when the closed-access density is held fixed and the
/// open density follows from f = open / (open + closed).
inline std::pair<Tier, Tier> open_tier_for_fixed_closed(const Tier& closed, double f) {
  if (!(f >= 0.0 && f < 1.0)) throw DomainError("open_tier_for_fixed_closed: f must lie in [0, 1)");
  Tier open = closed;
  open.density = f / (1.0 - f) * closed.density;
  return {open, closed};
}

}  // namespace hcn
