#pragma once

// Scenario JSON and CSV exports. Target SIRs are stored in dB on disk and
// converted to linear only here.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "hcn/errors.hpp"
#include "hcn/mcsim.hpp"
#include "hcn/model.hpp"

namespace hcn {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Shortest round-trip decimal form, independent of the global locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["alpha"] = net.alpha;
  j["tiers"] = nlohmann::json::array();
  for (const auto& t : net.tiers) {
    j["tiers"].push_back({{"power", t.power},
                          {"density", t.density},
                          {"target_sir_db", linear_to_db(t.target_sir)},
                          {"activity", t.activity}});
  }
  j["access"] = nlohmann::json::array();
  for (std::size_t i : net.access) j["access"].push_back(i + 1);
  return j;
}

/// Parses the scenario schema. "access" is optional and defaults to all tiers.
/// Structural problems raise ScenarioError; values are checked by validate().
inline Network network_from_json(const nlohmann::json& j) {
  auto number = [](const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ScenarioError(where + ": missing \"" + key + "\"");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ScenarioError(where + "." + key + ": expected a number");
    return v.get<double>();
  };
  if (!j.is_object()) throw ScenarioError("scenario: expected a JSON object");
  Network net;
  net.alpha = number(j, "alpha", "scenario");
  if (!j.contains("tiers") || !j.at("tiers").is_array()) throw ScenarioError("scenario: \"tiers\" must be an array");
  std::size_t k = 0;
  for (const auto& tj : j.at("tiers")) {
    const std::string where = "tiers[" + std::to_string(++k) + "]";
    net.tiers.push_back(Tier{number(tj, "power", where), number(tj, "density", where),
                             db_to_linear(number(tj, "target_sir_db", where)), number(tj, "activity", where)});
  }
  if (j.contains("access")) {
    if (!j.at("access").is_array()) throw ScenarioError("scenario: \"access\" must be an array");
    for (const auto& a : j.at("access")) {
      if (!a.is_number_integer() || a.get<long long>() < 1) {
        throw ScenarioError("scenario: access entries are 1-based tier indices");
      }
      net.access.push_back(static_cast<std::size_t>(a.get<long long>() - 1));
    }
    std::sort(net.access.begin(), net.access.end());
  } else {
    net.access.resize(net.tiers.size());
    std::iota(net.access.begin(), net.access.end(), std::size_t{0});
  }
  return net;
}

/// Reads and parses a scenario file. Parse errors carry line and column.
inline Network load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line/column
    const std::string text = buf.str();
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ScenarioError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  return network_from_json(j);
}

/// CSV "x,y,tier,active,fading"; tiers are 1-based.
inline void write_realization_csv(std::ostream& os, const Realization& real) {
  os << "x,y,tier,active,fading\n";
  for (const auto& b : real.stations) {
    os << format_number(b.position.x) << ',' << format_number(b.position.y) << ',' << (b.tier + 1) << ','
       << (b.active ? 1 : 0) << ',' << format_number(b.fading) << '\n';
  }
}

/// CSV "x,y,bs_id,tier", one row per pixel center. Blanked pixels have
/// bs_id -1 and tier 0.
inline void write_raster_csv(std::ostream& os, const Raster& raster, const Realization& real) {
  os << "x,y,bs_id,tier\n";
  for (int row = 0; row < raster.resolution; ++row) {
    for (int col = 0; col < raster.resolution; ++col) {
      const Point p = raster.pixel_center(row, col);
      const int id = raster.at(row, col);
      const std::size_t tier = id < 0 ? 0 : real.stations[static_cast<std::size_t>(id)].tier + 1;
      os << format_number(p.x) << ',' << format_number(p.y) << ',' << id << ',' << tier << '\n';
    }
  }
}

}  // namespace hcn
