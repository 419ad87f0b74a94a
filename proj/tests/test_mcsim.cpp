#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hcn/analytic.hpp"
#include "hcn/mcsim.hpp"

namespace {

using namespace hcn;
constexpr double kPi = std::numbers::pi;

Network single(double alpha, double beta, double p) { return Network::open(alpha, {Tier{1.0, 1.0, beta, p}}); }

SimConfig config(std::uint64_t trials, std::uint64_t seed, double radius = 0.0) {
  SimConfig s;
  s.trials = trials;
  s.seed = seed;
  s.window_radius = radius;
  s.threads = 1;
  return s;
}

TEST(Ppp, ZeroDensityIsEmpty) {
  auto rng = substream(1, 0, 0);
  EXPECT_TRUE(sample_ppp(0.0, 10.0, rng).empty());
  EXPECT_THROW(sample_ppp(-1.0, 10.0, rng), DomainError);
  EXPECT_THROW(sample_ppp(1.0, 0.0, rng), DomainError);
}

TEST(Ppp, MeanCountAndUniformity) {
  const double radius = std::sqrt(100.0 / kPi);
  const int draws = 2000;
  std::vector<double> radial(10, 0.0);
  std::vector<double> angular(8, 0.0);
  double total = 0.0;
  for (int i = 0; i < draws; ++i) {
    auto rng = substream(7, static_cast<std::uint64_t>(i), 0);
    const auto pts = sample_ppp(1.0, radius, rng);
    total += static_cast<double>(pts.size());
    for (const auto& p : pts) {
      const double u = (p.x * p.x + p.y * p.y) / (radius * radius);
      radial[std::min<std::size_t>(9, static_cast<std::size_t>(u * 10))] += 1.0;
      const double th = std::atan2(p.y, p.x) + kPi;
      angular[std::min<std::size_t>(7, static_cast<std::size_t>(th / (2 * kPi) * 8))] += 1.0;
    }
  }
  EXPECT_NEAR(total / draws, 100.0, 1.0);  // sd of the mean is 0.22
  auto chi2 = [&](const std::vector<double>& bins) {
    const double e = total / static_cast<double>(bins.size());
    double c = 0.0;
    for (double b : bins) c += (b - e) * (b - e) / e;
    return c;
  };
  EXPECT_LT(chi2(radial), 27.9);   // df 9, p = 0.001
  EXPECT_LT(chi2(angular), 24.3);  // df 7, p = 0.001
}

TEST(Ppp, LargerWindowExtendsSample) {
  auto a = substream(3, 5, 0);
  auto b = substream(3, 5, 0);
  const auto small = sample_ppp(2.0, 5.0, a);
  const auto large = sample_ppp(2.0, 9.0, b);
  ASSERT_LE(small.size(), large.size());
  for (std::size_t i = 0; i < small.size(); ++i) {
    EXPECT_EQ(small[i].x, large[i].x);
    EXPECT_EQ(small[i].y, large[i].y);
  }
}

TEST(HexGrid, DensityAndSpacing) {
  const double density = 0.5;
  const double radius = 40.0;
  auto rng = substream(11, 0, 0);
  const auto pts = sample_hex_grid(density, radius, rng);
  const double expected = density * kPi * radius * radius;
  EXPECT_NEAR(static_cast<double>(pts.size()), expected, 0.02 * expected);
  const double spacing = std::sqrt(2.0 / (std::sqrt(3.0) * density));
  // nearest neighbour of interior sites sits at the lattice spacing
  int checked = 0;
  for (const auto& p : pts) {
    if (p.x * p.x + p.y * p.y > 100.0) continue;
    double best = INFINITY;
    for (const auto& q : pts) {
      const double d = std::hypot(p.x - q.x, p.y - q.y);
      if (d > 0.0) best = std::min(best, d);
    }
    EXPECT_NEAR(best, spacing, 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Window, DefaultHoldsEnoughPoints) {
  const auto net = Network::open(4.0, {Tier{1.0, 1.0, 1.0, 0.5}, Tier{0.1, 4.0, 1.0, 0.2}});
  SimConfig sim;
  const double r = default_window_radius(net, sim);
  EXPECT_NEAR(0.5 * kPi * r * r, 500.0, 1e-9);
  sim.min_expected_points = 2000;
  EXPECT_NEAR(0.5 * kPi * std::pow(default_window_radius(net, sim), 2), 2000.0, 1e-9);
  EXPECT_NEAR(kPi * std::pow(default_window_radius(net, SimConfig{}, false), 2), 500.0, 1e-9);
}

TEST(Window, RealizationsNestInRadius) {
  const auto net = Network::open(4.0, {Tier{1.0, 1.0, 1.0, 0.5}});
  const auto small = sample_realization(net, config(1, 9, 4.0), Placement::ppp, 3);
  const auto large = sample_realization(net, config(1, 9, 8.0), Placement::ppp, 3);
  ASSERT_LE(small.stations.size(), large.stations.size());
  for (std::size_t i = 0; i < small.stations.size(); ++i) {
    EXPECT_NEAR(small.stations[i].position.x, large.stations[i].position.x, 1e-12);
    EXPECT_EQ(small.stations[i].active, large.stations[i].active);
    EXPECT_EQ(small.stations[i].fading, large.stations[i].fading);
  }
}

TEST(Realization, ThinningFraction) {
  const auto net = Network::open(4.0, {Tier{1.0, 2.0, 1.0, 0.3}});
  const auto real = sample_realization(net, config(1, 4, 30.0));
  double active = 0.0;
  for (const auto& b : real.stations) active += b.active ? 1.0 : 0.0;
  const double n = static_cast<double>(real.stations.size());
  EXPECT_NEAR(n, 2.0 * kPi * 900.0, 4.0 * std::sqrt(2.0 * kPi * 900.0));
  EXPECT_NEAR(active / n, 0.3, 4.0 * std::sqrt(0.21 / n));
}

TEST(Estimate, FullyLoadedSingleTierIsTwoOverPi) {
  const auto e = estimate_coverage(single(4.0, 1.0, 1.0), config(10000, 21), Placement::ppp, LoadModel::fully_loaded);
  EXPECT_NEAR(e.mean, 2.0 / kPi, 3.0 * e.std_error);
  EXPECT_EQ(e.empty_trials, 0u);
}

TEST(Estimate, UnitActivityThinningMatchesFullLoad) {
  const auto net = single(4.0, 1.0, 1.0);
  const auto a = estimate_coverage(net, config(2000, 5), Placement::ppp, LoadModel::fully_loaded);
  const auto b = estimate_coverage(net, config(2000, 5), Placement::ppp, LoadModel::conditional_thinning);
  EXPECT_EQ(a.covered, b.covered);
}

TEST(Estimate, ReproducibleAndThreadIndependent) {
  const auto net = Network::open(3.8, {Tier{1.0, 1.0, 1.0, 0.5}, Tier{0.1, 3.0, 2.0, 0.7}});
  auto sim = config(1500, 77);
  const auto a = estimate_coverage(net, sim);
  const auto b = estimate_coverage(net, sim);
  sim.threads = 3;
  const auto c = estimate_coverage(net, sim);
  EXPECT_EQ(a.covered, b.covered);
  EXPECT_EQ(a.covered, c.covered);
  sim.seed = 78;
  EXPECT_NE(estimate_coverage(net, sim).covered, a.covered);
}

TEST(Estimate, ThinningMatchesAnalytic) {
  const auto net = single(4.0, 1.0, 0.5);
  const auto e = estimate_coverage(net, config(10000, 31));
  EXPECT_NEAR(e.mean, coverage(net).value, 3.0 * e.std_error);
}

TEST(Estimate, IdleOnlyMatchesAnalytic) {
  const auto net = single(4.0, 1.0, 0.5);
  const auto e = estimate_coverage(net, config(10000, 41), Placement::ppp, LoadModel::idle_only);
  EXPECT_NEAR(e.mean, coverage_idle_only(net).value, 3.0 * e.std_error);
}

TEST(Estimate, ClosedAccessNeverBeatsOpenPathwise) {
  auto open = Network::open(3.8, {Tier{1.0, 1.0, 1.0, 0.5}, Tier{0.05, 4.0, 1.0, 0.4}});
  auto closed = open;
  closed.access = {0};
  const auto a = estimate_coverage(open, config(3000, 12));
  const auto b = estimate_coverage(closed, config(3000, 12));
  EXPECT_LE(b.covered, a.covered);
}

TEST(Estimate, FullLoadNeverBeatsThinningPathwise) {
  const auto net = Network::open(3.8, {Tier{1.0, 1.0, 1.0, 0.6}, Tier{0.05, 4.0, 2.0, 0.3}});
  const auto a = estimate_coverage(net, config(3000, 13, 20.0), Placement::ppp, LoadModel::fully_loaded);
  const auto b = estimate_coverage(net, config(3000, 13, 20.0), Placement::ppp, LoadModel::conditional_thinning);
  EXPECT_LE(a.covered, b.covered);
}

TEST(Estimate, FullLoadBelowThinningAtHighLoads) {
  for (double p : {0.5, 0.8}) {
    const auto net = single(3.8, 1.0, p);
    const auto a = estimate_coverage(net, config(3000, 14, 15.0), Placement::ppp, LoadModel::fully_loaded);
    const auto b = estimate_coverage(net, config(3000, 14, 15.0));
    EXPECT_LE(a.mean, b.mean) << "p = " << p;
  }
}

TEST(Window, DoublingRadiusStaysWithinNoise) {
  const auto net = single(4.0, 1.0, 0.5);
  const double r = default_window_radius(net, SimConfig{});
  const auto a = estimate_coverage(net, config(4000, 15));
  const auto b = estimate_coverage(net, config(4000, 15, 2.0 * r));
  EXPECT_LT(std::abs(a.mean - b.mean), 2.0 * a.std_error);
}

TEST(Estimate, HexFirstTierBeatsPpp) {
  const auto net = single(4.0, 1.0, 1.0);
  const auto ppp = estimate_coverage(net, config(3000, 17), Placement::ppp, LoadModel::fully_loaded);
  const auto hex = estimate_coverage(net, config(3000, 17), Placement::hex_first_tier, LoadModel::fully_loaded);
  EXPECT_GT(hex.mean, ppp.mean + 3.0 * (hex.std_error + ppp.std_error));
}

TEST(Estimate, EmptyWindowsAreCounted) {
  const auto net = Network::open(4.0, {Tier{1.0, 0.01, 1.0, 1.0}});
  const auto e = estimate_coverage(net, config(500, 3, 1.0));
  EXPECT_GT(e.empty_trials, 400u);
  EXPECT_LE(e.covered, e.trials - e.empty_trials);
}

TEST(System, NoUsersMeansNoInterference) {
  const auto net = Network::open(3.8, {Tier{1.0, 1.0, 1.0, 0.5}, Tier{0.1, 1.0, 1.0, 0.5}});
  const auto e = estimate_coverage_system(net, 0.0, 20, config(300, 2));
  EXPECT_EQ(e.mean, 1.0);
}

TEST(System, LoadsFollowAssociationAreas) {
  const auto net = Network::open(3.8, {Tier{1.0, 1.0, 1.0, 1.0}, Tier{0.1, 1.0, 1.0, 1.0}});
  const double users = 10.0;
  SystemTrialLoads loads;
  estimate_coverage_system(net, users, 20, config(200, 8), &loads);
  const auto expect = activity_from_user_density(net, users, 20);
  for (std::size_t k = 0; k < 2; ++k) {
    const double per_bs = static_cast<double>(loads.users_per_tier[k]) / static_cast<double>(loads.bs_per_tier[k]);
    const double ref = expect.served_fraction[k] * users / net.tiers[k].density;
    EXPECT_NEAR(per_bs, ref, 0.03 * ref) << "tier " << k;
  }
}

TEST(System, Reproducible) {
  const auto net = Network::open(3.8, {Tier{1.0, 1.0, 1.0, 1.0}, Tier{0.1, 1.0, 1.0, 1.0}});
  const auto a = estimate_coverage_system(net, 10.0, 20, config(100, 6));
  const auto b = estimate_coverage_system(net, 10.0, 20, config(100, 6));
  EXPECT_EQ(a.covered, b.covered);
}

Realization two_stations(bool second_active) {
  Realization real;
  real.radius = 2.0;
  real.stations = {{{-1.0, 0.0}, 0, true, 1.0}, {{1.0, 0.0}, 0, second_active, 1.0}};
  return real;
}

TEST(Raster, SingleStationOwnsEverything) {
  const auto net = single(4.0, 1.0, 1.0);
  Realization real;
  real.radius = 1.0;
  real.stations = {{{0.3, -0.2}, 0, true, 1.0}};
  const auto r = coverage_region_raster(real, net, 16, RasterMode::full);
  for (int id : r.bs_id) EXPECT_EQ(id, 0);
}

TEST(Raster, EqualPowersSplitAtBisector) {
  const auto r = coverage_region_raster(two_stations(true), single(4.0, 1.0, 1.0), 20, RasterMode::full);
  for (int row = 0; row < 20; ++row) {
    for (int col = 0; col < 20; ++col) {
      EXPECT_EQ(r.at(row, col), r.pixel_center(row, col).x < 0.0 ? 0 : 1);
    }
  }
}

TEST(Raster, StrongerTierPushesBoundary) {
  auto net = Network::open(4.0, {Tier{1.0, 1.0, 1.0, 1.0}, Tier{0.01, 1.0, 1.0, 1.0}});
  auto real = two_stations(true);
  real.stations[1].tier = 1;
  const auto r = coverage_region_raster(real, net, 40, RasterMode::full);
  // the boundary lies where r0 / r1 = (P0/P1)^(1/alpha) = sqrt(10)
  int owned = 0;
  for (int id : r.bs_id) owned += id == 0 ? 1 : 0;
  EXPECT_GT(owned, 1000);
}

TEST(Raster, ThinnedModes) {
  const auto net = single(4.0, 1.0, 0.5);
  const auto real = two_stations(false);
  const auto full = coverage_region_raster(real, net, 20, RasterMode::full);
  const auto regions = coverage_region_raster(real, net, 20, RasterMode::thinned_regions);
  const auto biased = coverage_region_raster(real, net, 20, RasterMode::thinned_biased);
  for (std::size_t i = 0; i < full.bs_id.size(); ++i) {
    EXPECT_EQ(regions.bs_id[i], full.bs_id[i] == 1 ? -1 : full.bs_id[i]);
    EXPECT_EQ(biased.bs_id[i], 0);
  }
}

TEST(Raster, BiasedRegionsContainFullRegions) {
  const auto net = Network::open(4.0, {Tier{1.0, 1.0, 1.0, 0.5}, Tier{0.05, 4.0, 1.0, 0.5}});
  const auto real = sample_realization(net, config(1, 19, 3.0));
  const auto full = coverage_region_raster(real, net, 60, RasterMode::full);
  const auto biased = coverage_region_raster(real, net, 60, RasterMode::thinned_biased);
  for (std::size_t i = 0; i < full.bs_id.size(); ++i) {
    const int id = full.bs_id[i];
    if (real.stations[static_cast<std::size_t>(id)].active) EXPECT_EQ(biased.bs_id[i], id);
    if (biased.bs_id[i] >= 0) EXPECT_TRUE(real.stations[static_cast<std::size_t>(biased.bs_id[i])].active);
  }
}

}  // namespace
