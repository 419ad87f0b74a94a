#pragma once

// Monte Carlo oracle for the load-aware coverage model. Each trial samples
// the BS tiers around a typical user at the origin, splits every tier into
// active and idle BSs, draws Rayleigh fading and applies the coverage event
// directly. No target-SIR assumption is used.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hcn/errors.hpp"
#include "hcn/model.hpp"

namespace hcn {

using Engine = std::mt19937_64;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct BaseStation {
  Point position;
  std::size_t tier = 0;
  bool active = true;
  double fading = 1.0;
};

struct Realization {
  double radius = 0.0;
  std::vector<BaseStation> stations;
};

struct SimConfig {
  double window_radius = 0.0;  // 0 selects the radius automatically
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  std::uint64_t min_expected_points = 500;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t covered = 0;
  std::uint64_t empty_trials = 0;  // trials with no BS in the window
};

enum class Placement { ppp, hex_first_tier };
enum class LoadModel { conditional_thinning, fully_loaded, idle_only };

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Independent engine for (seed, trial, stream). Trials can run in any order.
inline Engine substream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) {
  const std::uint64_t s = detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ trial) ^ (stream + 1));
  return Engine{s};
}

inline Estimate make_estimate(std::uint64_t covered, std::uint64_t trials, std::uint64_t empty = 0) {
  Estimate e;
  e.trials = trials;
  e.covered = covered;
  e.empty_trials = empty;
  e.mean = trials == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(trials);
  e.std_error = trials == 0 ? 0.0 : std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
  return e;
}

/// Homogeneous PPP on the disc of the given radius. Points are generated in
/// order of increasing distance from the origin (unit-rate arrivals mapped
/// through pi lambda r^2), so a larger radius extends the same sample.
inline std::vector<Point> sample_ppp(double density, double radius, Engine& rng) {
  if (!(density >= 0.0)) throw DomainError("sample_ppp: density must be >= 0");
  if (!(radius > 0.0)) throw DomainError("sample_ppp: radius must be > 0");
  std::vector<Point> out;
  if (density == 0.0) return out;
  std::exponential_distribution<double> gap(1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double limit = std::numbers::pi * density * radius * radius;
  for (double t = gap(rng); t <= limit; t += gap(rng)) {
    const double r = std::sqrt(t / (std::numbers::pi * density));
    const double th = angle(rng);
    out.push_back({r * std::cos(th), r * std::sin(th)});
  }
  return out;
}

/// Hexagonal lattice with the given site density, randomly translated and
/// rotated, clipped to the disc.
inline std::vector<Point> sample_hex_grid(double density, double radius, Engine& rng) {
  if (!(density > 0.0)) throw DomainError("sample_hex_grid: density must be > 0");
  if (!(radius > 0.0)) throw DomainError("sample_hex_grid: radius must be > 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double spacing = std::sqrt(2.0 / (std::sqrt(3.0) * density));
  const double u = unit(rng);
  const double v = unit(rng);
  const double th = 2.0 * std::numbers::pi * unit(rng);
  const double c = std::cos(th);
  const double s = std::sin(th);
  const int n = static_cast<int>(std::ceil(radius / (spacing * std::sqrt(3.0) / 2.0))) + 2;
  std::vector<Point> out;
  for (int j = -n; j <= n; ++j) {
    for (int i = -2 * n; i <= 2 * n; ++i) {
      const double a = i + u;
      const double b = j + v;
      const double x = spacing * (a + 0.5 * b);
      const double y = spacing * (std::sqrt(3.0) / 2.0) * b;
      if (x * x + y * y > radius * radius) continue;
      out.push_back({c * x - s * y, s * x + c * y});
    }
  }
  return out;
}

/// Radius holding at least max(500, min_expected_points) BSs of the sparsest
/// transmitting tier in expectation.
inline double default_window_radius(const Network& net, const SimConfig& sim, bool use_activity = true) {
  double sparsest = 0.0;
  for (const auto& t : net.tiers) {
    const double rho = use_activity ? t.activity * t.density : t.density;
    if (rho > 0.0 && (sparsest == 0.0 || rho < sparsest)) sparsest = rho;
  }
  const double n = static_cast<double>(std::max<std::uint64_t>(500, sim.min_expected_points));
  return std::sqrt(n / (std::numbers::pi * sparsest));
}

namespace detail {

// Visits the BSs of tier `index` for one trial as
// visit(r2, angle, active, fading, hex_position_or_null). Each PPP point
// consumes a fixed number of draws, keeping realizations nested in the radius.
template <typename Visit>
void for_each_station(const Tier& tier, std::size_t index, double radius, Placement placement, Engine& rng,
                      Visit&& visit) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> fade(1.0);
  if (placement == Placement::hex_first_tier && index == 0) {
    for (const auto& p : sample_hex_grid(tier.density, radius, rng)) {
      const bool active = unit(rng) < tier.activity;
      visit(p.x * p.x + p.y * p.y, 0.0, active, fade(rng), &p);
    }
    return;
  }
  std::exponential_distribution<double> gap(1.0);
  const double rate = std::numbers::pi * tier.density;
  const double limit = rate * radius * radius;
  for (double t = gap(rng); t <= limit; t += gap(rng)) {
    const double th = 2.0 * std::numbers::pi * unit(rng);
    const bool active = unit(rng) < tier.activity;
    visit(t / rate, th, active, fade(rng), static_cast<const Point*>(nullptr));
  }
}

inline Realization sample_trial(const Network& net, double radius, Placement placement, std::uint64_t seed,
                                std::uint64_t trial) {
  Realization real{radius, {}};
  for (std::size_t k = 0; k < net.tiers.size(); ++k) {
    auto rng = substream(seed, trial, k);
    for_each_station(net.tiers[k], k, radius, placement, rng,
                     [&](double r2, double th, bool active, double fading, const Point* at) {
                       const double r = std::sqrt(r2);
                       const Point pos = at ? *at : Point{r * std::cos(th), r * std::sin(th)};
                       real.stations.push_back({pos, k, active, fading});
                     });
  }
  return real;
}

// Received power, tier and activity of one BS as seen from the origin.
struct Reception {
  double power;
  std::size_t tier;
  bool active;
};

// Coverage event at the origin.
inline bool covered_at_origin(const Network& net, const std::vector<Reception>& rx, LoadModel load) {
  double interference = 0.0;
  for (const auto& r : rx) {
    if (load == LoadModel::fully_loaded || r.active) interference += r.power;
  }
  for (const auto& r : rx) {
    if (!net.accessible(r.tier)) continue;
    const double beta = net.tiers[r.tier].target_sir;
    const bool transmits = load == LoadModel::fully_loaded || r.active;
    if (transmits) {
      if (load == LoadModel::idle_only) continue;
      if (r.power >= beta * (interference - r.power)) return true;
    } else if (load != LoadModel::fully_loaded) {
      if (r.power >= beta * interference) return true;
    }
  }
  return false;
}

inline void receptions(const Network& net, const std::vector<BaseStation>& stations, std::vector<Reception>& rx) {
  rx.clear();
  for (const auto& b : stations) {
    const double r2 = b.position.x * b.position.x + b.position.y * b.position.y;
    rx.push_back({net.tiers[b.tier].power * b.fading * std::pow(r2, -net.alpha / 2.0), b.tier, b.active});
  }
}

// Runs trials [0, n) split into contiguous chunks, one per worker. The result
// is a sum of integer counts, so it does not depend on the split.
template <typename TrialFn>
Estimate run_trials(std::uint64_t n, unsigned threads, TrialFn&& trial_fn) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(n, 1)));
  std::vector<std::uint64_t> covered(workers, 0);
  std::vector<std::uint64_t> empty(workers, 0);
  auto work = [&](unsigned w) {
    const std::uint64_t begin = n * w / workers;
    const std::uint64_t end = n * (w + 1) / workers;
    std::vector<Reception> scratch;
    for (std::uint64_t t = begin; t < end; ++t) {
      const int outcome = trial_fn(t, scratch);  // 1 covered, 0 not, -1 empty window
      if (outcome == 1) ++covered[w];
      if (outcome < 0) ++empty[w];
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  std::uint64_t c = 0;
  std::uint64_t e = 0;
  for (unsigned w = 0; w < workers; ++w) {
    c += covered[w];
    e += empty[w];
  }
  return make_estimate(c, n, e);
}

}  // namespace detail

/// One sampled realization (trial index `trial` of the given seed).
inline Realization sample_realization(const Network& net, const SimConfig& sim,
                                      Placement placement = Placement::ppp, std::uint64_t trial = 0) {
  validate(net);
  const double radius = sim.window_radius > 0.0 ? sim.window_radius : default_window_radius(net, sim);
  return detail::sample_trial(net, radius, placement, sim.seed, trial);
}

/// Monte Carlo coverage probability of the typical user at the origin.
inline Estimate estimate_coverage(const Network& net, const SimConfig& sim, Placement placement = Placement::ppp,
                                  LoadModel load = LoadModel::conditional_thinning) {
  validate(net);
  if (sim.trials < 1) throw DomainError("estimate_coverage: trials must be >= 1");
  const double radius = sim.window_radius > 0.0
                            ? sim.window_radius
                            : default_window_radius(net, sim, load != LoadModel::fully_loaded);
  const double half_alpha = net.alpha / 2.0;
  return detail::run_trials(sim.trials, sim.threads, [&](std::uint64_t t, std::vector<detail::Reception>& rx) {
    rx.clear();
    for (std::size_t k = 0; k < net.tiers.size(); ++k) {
      auto rng = substream(sim.seed, t, k);
      const double power = net.tiers[k].power;
      detail::for_each_station(net.tiers[k], k, radius, placement, rng,
                               [&](double r2, double, bool active, double fading, const Point*) {
                                 rx.push_back({power * fading * std::exp(-half_alpha * std::log(r2)), k, active});
                               });
    }
    if (rx.empty()) return -1;
    return detail::covered_at_origin(net, rx, load) ? 1 : 0;
  });
}

namespace detail {

// Uniform bucket grid over [-radius, radius]^2 for nearest-point queries.
class PointGrid {
 public:
  PointGrid(const std::vector<BaseStation>& stations, std::vector<std::size_t> members, double radius,
            double cell)
      : stations_(stations), radius_(radius), cell_(cell) {
    dim_ = std::max(1, static_cast<int>(std::ceil(2.0 * radius / cell)));
    buckets_.resize(static_cast<std::size_t>(dim_) * dim_);
    for (std::size_t k : members) {
      buckets_[index(cell_of(stations[k].position.x), cell_of(stations[k].position.y))].push_back(k);
    }
    empty_ = members.empty();
  }

  // Station index nearest to (x, y) and its squared distance; npos when empty.
  std::pair<std::size_t, double> nearest(double x, double y) const {
    std::size_t best = npos;
    double best_d2 = 0.0;
    if (empty_) return {best, best_d2};
    const int cx = cell_of(x);
    const int cy = cell_of(y);
    for (int ring = 0; ring <= dim_; ++ring) {
      if (best != npos) {
        // every unvisited cell is at least (ring - 1) cells away
        const double reach = (ring - 1) * cell_;
        if (reach > 0.0 && reach * reach > best_d2) break;
      }
      for (int gx = cx - ring; gx <= cx + ring; ++gx) {
        for (int gy = cy - ring; gy <= cy + ring; ++gy) {
          if (std::max(std::abs(gx - cx), std::abs(gy - cy)) != ring) continue;
          if (gx < 0 || gy < 0 || gx >= dim_ || gy >= dim_) continue;
          for (std::size_t k : buckets_[index(gx, gy)]) {
            const double dx = stations_[k].position.x - x;
            const double dy = stations_[k].position.y - y;
            const double d2 = dx * dx + dy * dy;
            if (best == npos || d2 < best_d2) {
              best = k;
              best_d2 = d2;
            }
          }
        }
      }
    }
    return {best, best_d2};
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  int cell_of(double v) const {
    return std::clamp(static_cast<int>(std::floor((v + radius_) / cell_)), 0, dim_ - 1);
  }
  std::size_t index(int gx, int gy) const { return static_cast<std::size_t>(gy) * dim_ + gx; }

  const std::vector<BaseStation>& stations_;
  double radius_;
  double cell_;
  int dim_ = 1;
  bool empty_ = true;
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace detail

struct SystemTrialLoads {
  std::vector<std::uint64_t> users_per_tier;  // users served by each tier
  std::vector<std::uint64_t> bs_per_tier;
};

/// Detailed system simulation: users drawn as a PPP attach to the BS with the
/// highest average received power; a BS serving N users transmits in the
/// evaluated resource block with probability min(N / M, 1). Tier activity
/// factors in `net` are ignored. When `loads` is given, per-tier user and BS
/// counts summed over all trials are written to it.
inline Estimate estimate_coverage_system(const Network& net, double user_density, int resource_blocks,
                                         const SimConfig& sim, SystemTrialLoads* loads = nullptr) {
  validate(with_activity(net, std::vector<double>(net.tiers.size(), 1.0)));
  if (!(user_density >= 0.0)) throw DomainError("estimate_coverage_system: user density must be >= 0");
  if (resource_blocks < 1) throw DomainError("estimate_coverage_system: resource blocks must be >= 1");
  if (sim.trials < 1) throw DomainError("estimate_coverage_system: trials must be >= 1");
  const double radius = sim.window_radius > 0.0 ? sim.window_radius : default_window_radius(net, sim, false);
  const std::size_t k_tiers = net.tiers.size();
  const double alpha = net.alpha;
  // per-thread load accumulation would need merging; serialize it instead
  const unsigned threads = loads ? 1u : sim.threads;
  if (loads) {
    loads->users_per_tier.assign(k_tiers, 0);
    loads->bs_per_tier.assign(k_tiers, 0);
  }

  return detail::run_trials(sim.trials, threads, [&](std::uint64_t t, std::vector<detail::Reception>& rx) {
    std::vector<BaseStation> stations;
    std::vector<double> draw;  // uniform used for the activity decision
    std::vector<std::vector<std::size_t>> members(k_tiers);
    for (std::size_t k = 0; k < k_tiers; ++k) {
      auto rng = substream(sim.seed, t, k);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::exponential_distribution<double> fade(1.0);
      for (const auto& p : sample_ppp(net.tiers[k].density, radius, rng)) {
        members[k].push_back(stations.size());
        stations.push_back({p, k, false, fade(rng)});
        draw.push_back(unit(rng));
      }
    }
    if (stations.empty()) return -1;

    std::vector<std::uint64_t> served(stations.size(), 0);
    if (user_density > 0.0) {
      std::vector<detail::PointGrid> grids;
      for (std::size_t k = 0; k < k_tiers; ++k) {
        const double cell = 1.0 / std::sqrt(net.tiers[k].density);
        grids.emplace_back(stations, members[k], radius, cell);
      }
      auto user_rng = substream(sim.seed, t, k_tiers);
      for (const auto& u : sample_ppp(user_density, radius, user_rng)) {
        std::size_t best = detail::PointGrid::npos;
        double best_power = 0.0;
        for (std::size_t k = 0; k < k_tiers; ++k) {
          const auto [idx, d2] = grids[k].nearest(u.x, u.y);
          if (idx == detail::PointGrid::npos) continue;
          const double power = net.tiers[k].power * std::pow(d2, -alpha / 2.0);
          if (best == detail::PointGrid::npos || power > best_power) {
            best = idx;
            best_power = power;
          }
        }
        if (best != detail::PointGrid::npos) ++served[best];
      }
    }
    for (std::size_t s = 0; s < stations.size(); ++s) {
      const double p = std::min(1.0, static_cast<double>(served[s]) / resource_blocks);
      stations[s].active = draw[s] < p;
      if (loads) {
        loads->users_per_tier[stations[s].tier] += served[s];
        ++loads->bs_per_tier[stations[s].tier];
      }
    }
    detail::receptions(net, stations, rx);
    return detail::covered_at_origin(net, rx, LoadModel::conditional_thinning) ? 1 : 0;
  });
}

enum class RasterMode { full, thinned_regions, thinned_biased };

struct Raster {
  int resolution = 0;
  double radius = 0.0;
  // row-major, row 0 at y = -radius; -1 marks a blanked pixel
  std::vector<int> bs_id;

  Point pixel_center(int row, int col) const {
    const double step = 2.0 * radius / resolution;
    return {-radius + (col + 0.5) * step, -radius + (row + 0.5) * step};
  }
  int at(int row, int col) const { return bs_id[static_cast<std::size_t>(row) * resolution + col]; }
};

/// Serving-BS map under fading-averaged max-power association.
inline Raster coverage_region_raster(const Realization& real, const Network& net, int resolution,
                                     RasterMode mode) {
  if (real.stations.empty()) throw DomainError("coverage_region_raster: realization has no BSs");
  if (resolution < 1) throw DomainError("coverage_region_raster: resolution must be >= 1");
  Raster out{resolution, real.radius, std::vector<int>(static_cast<std::size_t>(resolution) * resolution, -1)};
  // argmax P r^-alpha == argmax P^(2/alpha) / r^2
  std::vector<double> reach;
  for (const auto& b : real.stations) reach.push_back(std::pow(net.tiers[b.tier].power, 2.0 / net.alpha));
  auto best_of = [&](Point q, bool active_only) {
    int best = -1;
    double best_v = 0.0;
    for (std::size_t k = 0; k < real.stations.size(); ++k) {
      const auto& b = real.stations[k];
      if (active_only && !b.active) continue;
      const double dx = b.position.x - q.x;
      const double dy = b.position.y - q.y;
      const double v = reach[k] / (dx * dx + dy * dy);
      if (best < 0 || v > best_v) {
        best = static_cast<int>(k);
        best_v = v;
      }
    }
    return best;
  };
  for (int row = 0; row < resolution; ++row) {
    for (int col = 0; col < resolution; ++col) {
      const Point q = out.pixel_center(row, col);
      int id = -1;
      switch (mode) {
        case RasterMode::full: id = best_of(q, false); break;
        case RasterMode::thinned_regions: {
          const int full = best_of(q, false);
          id = real.stations[static_cast<std::size_t>(full)].active ? full : -1;
          break;
        }
        case RasterMode::thinned_biased: id = best_of(q, true); break;
      }
      out.bs_id[static_cast<std::size_t>(row) * resolution + col] = id;
    }
  }
  return out;
}

}  // namespace hcn
