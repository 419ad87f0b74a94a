#pragma once

// hcncov command-line front end. run_cli() is the whole program; main() only
// forwards to it so tests can drive the commands in-process.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcn/hcn.hpp"

namespace hcn::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kNonConvergence = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario;
  std::string out;
  std::string engine = "analytic";
  std::uint64_t trials = 100000;
  std::optional<std::uint64_t> seed;
  double epsilon = 1e-10;
  int max_terms = 10000;
  std::string sweep_target;
  std::string sweep_values;
  int resolution = 200;
  std::string mode = "full";
  std::string report = "coverage";
  std::string variant = "exact";
  std::string placement = "ppp";
  std::string load = "thinning";
  std::string eta_scope = "all";
  double users = -1.0;
  int resource_blocks = 20;
  double radius = 0.0;
  int split_tier = 0;
  std::string export_realization;
};

/// "a,b,c", "lin:start:stop:count" or "log:start:stop:count".
inline std::vector<double> parse_values(const std::string& spec) {
  auto to_double = [](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw UsageError("bad number in --sweep-values: '" + s + "'");
    }
    if (used != s.size()) throw UsageError("bad number in --sweep-values: '" + s + "'");
    return v;
  };
  std::vector<std::string> parts;
  std::string item;
  const bool grid = spec.rfind("lin:", 0) == 0 || spec.rfind("log:", 0) == 0;
  std::istringstream in(grid ? spec.substr(4) : spec);
  while (std::getline(in, item, grid ? ':' : ',')) parts.push_back(item);
  std::vector<double> out;
  if (grid) {
    if (parts.size() != 3) throw UsageError("grid sweep needs start:stop:count");
    const double a = to_double(parts[0]);
    const double b = to_double(parts[1]);
    const int n = static_cast<int>(to_double(parts[2]));
    if (n < 1) throw UsageError("grid sweep count must be >= 1");
    const bool log_grid = spec[1] == 'o';
    if (log_grid && !(a > 0.0 && b > 0.0)) throw UsageError("log grid needs positive endpoints");
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      if (i == 0 || i == n - 1) {
        out.push_back(i == 0 ? a : b);
      } else {
        out.push_back(log_grid ? a * std::pow(b / a, f) : a + f * (b - a));
      }
    }
  } else {
    for (const auto& p : parts) out.push_back(to_double(p));
  }
  if (out.empty()) throw UsageError("--sweep-values is empty");
  return out;
}

/// A sweep target resolved against a loaded network.
struct SweepTarget {
  enum class Kind { tier_field, common_sir_db, alpha, user_density, access_fraction } kind;
  std::size_t tier = 0;
  std::string field;
};

inline SweepTarget parse_target(const std::string& s, const Network& net) {
  static const std::regex tier_re(R"(tier\[(\d+)\]\.(density|activity|power|target_sir_db))");
  std::smatch m;
  if (std::regex_match(s, m, tier_re)) {
    const auto idx = std::stoul(m[1].str());
    if (idx < 1 || idx > net.tiers.size()) throw UsageError("sweep target tier index out of range: " + s);
    return {SweepTarget::Kind::tier_field, idx - 1, m[2].str()};
  }
  if (s == "target_sir_db") return {SweepTarget::Kind::common_sir_db};
  if (s == "alpha") return {SweepTarget::Kind::alpha};
  if (s == "user_density") return {SweepTarget::Kind::user_density};
  if (s == "access_fraction") return {SweepTarget::Kind::access_fraction};
  throw UsageError("unknown sweep target: " + s);
}

struct SweepPoint {
  Network network;          // network analysed at this point
  std::optional<Network> open_counterpart;  // access_fraction only
  std::optional<double> user_density;       // user_density only
};

inline SweepPoint apply_target(const Network& base, const SweepTarget& t, double v, const Options& opt) {
  SweepPoint pt{base, std::nullopt, std::nullopt};
  auto& net = pt.network;
  switch (t.kind) {
    case SweepTarget::Kind::tier_field: {
      auto& tier = net.tiers[t.tier];
      if (t.field == "density") tier.density = v;
      if (t.field == "activity") tier.activity = v;
      if (t.field == "power") tier.power = v;
      if (t.field == "target_sir_db") tier.target_sir = db_to_linear(v);
      break;
    }
    case SweepTarget::Kind::common_sir_db:
      for (auto& tier : net.tiers) tier.target_sir = db_to_linear(v);
      break;
    case SweepTarget::Kind::alpha: net.alpha = v; break;
    case SweepTarget::Kind::user_density: {
      net = with_activity(net, activity_from_user_density(net, v, opt.resource_blocks).activity);
      pt.user_density = v;
      break;
    }
    case SweepTarget::Kind::access_fraction: {
      // the split tier's density is the closed-access density; an open copy
      // with density f/(1-f) times that is appended and made accessible
      const std::size_t k = opt.split_tier > 0 ? static_cast<std::size_t>(opt.split_tier - 1) : net.tiers.size() - 1;
      if (k >= net.tiers.size()) throw UsageError("--split-tier out of range");
      const auto [open, closed] = open_tier_for_fixed_closed(net.tiers[k], v);
      Network split;
      split.alpha = net.alpha;
      for (std::size_t i = 0; i < net.tiers.size(); ++i) {
        if (i == k) continue;
        if (net.accessible(i)) split.access.push_back(split.tiers.size());
        split.tiers.push_back(net.tiers[i]);
      }
      if (open.density > 0.0) {
        split.access.push_back(split.tiers.size());
        split.tiers.push_back(open);
      }
      split.tiers.push_back(closed);
      pt.open_counterpart = Network::open(split.alpha, split.tiers);
      net = split;
      break;
    }
  }
  return pt;
}

inline SeriesControl series_control(const Options& o) { return {o.epsilon, o.max_terms}; }

inline EtaScope eta_scope(const Options& o) {
  if (o.eta_scope == "all") return EtaScope::all_tiers;
  if (o.eta_scope == "access") return EtaScope::access_tiers;
  throw UsageError("--eta-scope must be 'all' or 'access'");
}

inline Placement placement(const Options& o) {
  if (o.placement == "ppp") return Placement::ppp;
  if (o.placement == "hex") return Placement::hex_first_tier;
  throw UsageError("--placement must be 'ppp' or 'hex'");
}

inline LoadModel load_model(const Options& o) {
  if (o.load == "thinning") return LoadModel::conditional_thinning;
  if (o.load == "full") return LoadModel::fully_loaded;
  if (o.load == "idle-only") return LoadModel::idle_only;
  throw UsageError("--load must be 'thinning', 'full' or 'idle-only'");
}

inline SimConfig sim_config(const Options& o) {
  SimConfig sim;
  sim.trials = o.trials;
  sim.seed = o.seed.value_or(0);
  sim.window_radius = o.radius;
  return sim;
}

inline CoverageResult analytic_for(const Network& net, const Options& o) {
  if (o.variant == "exact") return coverage(net, series_control(o), eta_scope(o));
  if (o.variant == "fully-loaded") return coverage_fully_loaded(net);
  if (o.variant == "idle-only") return coverage_idle_only(net, series_control(o), eta_scope(o));
  throw UsageError("--variant must be 'exact', 'fully-loaded' or 'idle-only'");
}

inline Estimate mc_for(const SweepPoint& pt, const Options& o) {
  const auto sim = sim_config(o);
  if (pt.user_density) return estimate_coverage_system(pt.network, *pt.user_density, o.resource_blocks, sim);
  LoadModel load = load_model(o);
  if (o.variant == "idle-only") load = LoadModel::idle_only;
  return estimate_coverage(pt.network, sim, placement(o), load);
}

inline nlohmann::ordered_json result_json(const CoverageResult& r) {
  nlohmann::ordered_json j;
  j["value"] = r.value;
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["terms_used"] = r.terms_used;
  j["a_over_eta"] = r.a_over_eta;
  j["converged"] = r.converged;
  j["max_abs_term"] = r.max_abs_term;
  j["warnings"] = r.warnings;
  return j;
}

inline int cmd_coverage(const Options& o, std::ostream& out) {
  auto net = load_scenario(o.scenario);
  Network analysed = net;
  if (o.users >= 0.0) analysed = with_activity(net, activity_from_user_density(net, o.users, o.resource_blocks).activity);
  const auto r = analytic_for(analysed, o);
  auto j = result_json(r);
  j["variant"] = o.variant;
  out << j.dump(2) << '\n';
  return r.converged ? kOk : kNonConvergence;
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const auto net = load_scenario(o.scenario);
  validate(net);
  if (o.sweep_target.empty() || o.sweep_values.empty()) {
    throw UsageError("sweep needs --sweep-target and --sweep-values");
  }
  const auto target = parse_target(o.sweep_target, net);
  const auto values = parse_values(o.sweep_values);
  const bool analytic = o.engine == "analytic" || o.engine == "both";
  const bool mc = o.engine == "mc" || o.engine == "both";
  if (!analytic && !mc) throw UsageError("--engine must be 'analytic', 'mc' or 'both'");
  if (mc) err << "seed=" << o.seed.value_or(0) << (o.seed ? "" : " (default)") << '\n';

  bool all_converged = true;
  if (o.report == "partial-sums") {
    out << "value,m,g_m,majorant,partial_sum,truncated_coverage\n";
    for (double v : values) {
      const auto pt = apply_target(net, target, v, o);
      validate(pt.network);
      std::vector<GTermTrace> trace;
      const auto r = coverage(pt.network, series_control(o), eta_scope(o), &trace);
      all_converged = all_converged && r.converged;
      const double base = coverage_fully_loaded(pt.network).value;
      for (const auto& t : trace) {
        out << format_number(v) << ',' << t.m << ',' << format_number(t.g_m) << ',' << format_number(t.majorant)
            << ',' << format_number(t.partial_sum) << ',' << format_number(base - t.partial_sum) << '\n';
      }
    }
    return all_converged ? kOk : kNonConvergence;
  }
  if (o.report == "terms") {
    out << "value,m_epsilon\n";
    for (double v : values) {
      const auto pt = apply_target(net, target, v, o);
      out << format_number(v) << ',' << truncation_terms(pt.network, o.epsilon, o.max_terms) << '\n';
    }
    return kOk;
  }
  if (o.report != "coverage") throw UsageError("--report must be 'coverage', 'partial-sums' or 'terms'");

  const bool split = target.kind == SweepTarget::Kind::access_fraction;
  out << "value";
  if (analytic) out << ",analytic,lower,upper,terms_used";
  if (analytic && split) out << ",analytic_open";
  if (mc) out << ",mc_mean,mc_stderr";
  out << '\n';
  for (double v : values) {
    const auto pt = apply_target(net, target, v, o);
    out << format_number(v);
    if (analytic) {
      const auto r = analytic_for(pt.network, o);
      all_converged = all_converged && r.converged;
      out << ',' << format_number(r.value) << ',' << format_number(r.lower) << ',' << format_number(r.upper) << ','
          << r.terms_used;
      if (split) out << ',' << format_number(analytic_for(*pt.open_counterpart, o).value);
    }
    if (mc) {
      const auto e = mc_for(pt, o);
      out << ',' << format_number(e.mean) << ',' << format_number(e.std_error);
    }
    out << '\n';
  }
  return all_converged ? kOk : kNonConvergence;
}

inline int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto net = load_scenario(o.scenario);
  SweepPoint pt{net, std::nullopt, std::nullopt};
  if (o.users >= 0.0) pt.user_density = o.users;
  const auto e = mc_for(pt, o);
  if (!o.export_realization.empty()) {
    std::ofstream f(o.export_realization);
    if (!f) throw std::runtime_error("cannot write " + o.export_realization);
    write_realization_csv(f, sample_realization(net, sim_config(o), placement(o)));
  }
  nlohmann::ordered_json j;
  j["mean"] = e.mean;
  j["std_error"] = e.std_error;
  j["trials"] = e.trials;
  j["empty_trials"] = e.empty_trials;
  j["seed"] = o.seed.value_or(0);
  j["seed_defaulted"] = !o.seed.has_value();
  if (e.empty_trials * 1000 > e.trials) err << "warning: more than 0.1% of trials had an empty window\n";
  out << j.dump(2) << '\n';
  return kOk;
}

inline int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  const auto net = load_scenario(o.scenario);
  validate(net);
  std::vector<SweepPoint> points;
  std::vector<double> labels;
  if (!o.sweep_target.empty()) {
    const auto target = parse_target(o.sweep_target, net);
    for (double v : parse_values(o.sweep_values)) {
      points.push_back(apply_target(net, target, v, o));
      labels.push_back(v);
    }
  } else {
    points.push_back({net, std::nullopt, std::nullopt});
    labels.push_back(0.0);
  }
  err << "seed=" << o.seed.value_or(0) << (o.seed ? "" : " (default)") << '\n';
  out << "value,analytic,mc_mean,mc_stderr,z,flagged\n";
  int flagged = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto r = analytic_for(points[i].network, o);
    const auto e = mc_for(points[i], o);
    const double diff = std::abs(r.value - e.mean);
    const double z = e.std_error > 0.0 ? diff / e.std_error : (diff == 0.0 ? 0.0 : INFINITY);
    const bool flag = z > 3.0;
    flagged += flag ? 1 : 0;
    out << format_number(labels[i]) << ',' << format_number(r.value) << ',' << format_number(e.mean) << ','
        << format_number(e.std_error) << ',' << format_number(z) << ',' << (flag ? 1 : 0) << '\n';
  }
  err << flagged << " of " << points.size() << " points flagged (z > 3)\n";
  return kOk;
}

inline int cmd_raster(const Options& o, std::ostream& out) {
  const auto net = load_scenario(o.scenario);
  RasterMode mode;
  if (o.mode == "full") {
    mode = RasterMode::full;
  } else if (o.mode == "thinned-regions") {
    mode = RasterMode::thinned_regions;
  } else if (o.mode == "thinned-biased") {
    mode = RasterMode::thinned_biased;
  } else {
    throw UsageError("--mode must be 'full', 'thinned-regions' or 'thinned-biased'");
  }
  auto sim = sim_config(o);
  if (sim.window_radius <= 0.0) {
    // a few dozen BSs of the densest tier are enough for an illustration
    double densest = 0.0;
    for (const auto& t : net.tiers) densest = std::max(densest, t.density);
    sim.window_radius = std::sqrt(60.0 / (std::numbers::pi * densest));
  }
  const auto real = sample_realization(net, sim, placement(o));
  if (real.stations.empty()) throw UsageError("sampled window contains no BS; increase --radius");
  write_raster_csv(out, coverage_region_raster(real, net, o.resolution, mode), real);
  return kOk;
}

/// Full program. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Coverage probability of load-aware heterogeneous cellular networks"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", o.out, "Write output to this file instead of stdout");
    sub->add_option("--epsilon", o.epsilon, "Series stopping threshold")->check(CLI::PositiveNumber);
    sub->add_option("--max-terms", o.max_terms, "Series term cap")->check(CLI::PositiveNumber);
    sub->add_option("--eta-scope", o.eta_scope, "Closed access: eta over 'all' tiers or 'access' tiers");
    sub->add_option("--variant", o.variant, "exact | fully-loaded | idle-only");
    sub->add_option("--users", o.users, "User density; sets activities from the user load");
    sub->add_option("--resource-blocks", o.resource_blocks, "Resource blocks per BS")->check(CLI::PositiveNumber);
  };
  auto sim = [&](CLI::App* sub) {
    sub->add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "RNG seed (default 0)");
    sub->add_option("--placement", o.placement, "ppp | hex (first tier on a hexagonal grid)");
    sub->add_option("--load", o.load, "thinning | full | idle-only");
    sub->add_option("--radius", o.radius, "Simulation window radius (0 = automatic)");
  };
  auto sweep_opts = [&](CLI::App* sub) {
    sub->add_option("--sweep-target", o.sweep_target,
                    "tier[N].density|activity|power|target_sir_db, target_sir_db, alpha, user_density, "
                    "access_fraction");
    sub->add_option("--sweep-values", o.sweep_values, "a,b,c | lin:start:stop:n | log:start:stop:n");
    sub->add_option("--split-tier", o.split_tier, "Tier split by access_fraction (default last)");
  };

  auto* c_cov = app.add_subcommand("coverage", "Analytic coverage probability as JSON");
  common(c_cov);
  auto* c_sweep = app.add_subcommand("sweep", "Parameter sweep as CSV");
  common(c_sweep);
  sim(c_sweep);
  sweep_opts(c_sweep);
  c_sweep->add_option("--engine", o.engine, "analytic | mc | both");
  c_sweep->add_option("--report", o.report, "coverage | partial-sums | terms");
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo coverage estimate as JSON");
  common(c_sim);
  sim(c_sim);
  c_sim->add_option("--export-realization", o.export_realization, "Write one realization as CSV");
  auto* c_cmp = app.add_subcommand("compare", "Analytic vs Monte Carlo table with z-scores");
  common(c_cmp);
  sim(c_cmp);
  sweep_opts(c_cmp);
  auto* c_ras = app.add_subcommand("raster", "Serving-BS map of one realization as CSV");
  common(c_ras);
  sim(c_ras);
  c_ras->add_option("--resolution", o.resolution, "Pixels per side")->check(CLI::PositiveNumber);
  c_ras->add_option("--mode", o.mode, "full | thinned-regions | thinned-biased");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  std::ostringstream buf;
  int code = kOk;
  try {
    if (*c_cov) code = cmd_coverage(o, buf);
    if (*c_sweep) code = cmd_sweep(o, buf, err);
    if (*c_sim) code = cmd_simulate(o, buf, err);
    if (*c_cmp) code = cmd_compare(o, buf, err);
    if (*c_ras) code = cmd_raster(o, buf);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ScenarioError& e) {
    err << "scenario error: " << e.what() << '\n';
    return kValidation;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const ConvergenceError& e) {
    err << "non-convergence: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  if (o.out.empty()) {
    out << buf.str();
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << o.out << '\n';
      return kUsage;
    }
    f << buf.str();
  }
  return code;
}

}  // namespace hcn::cli
