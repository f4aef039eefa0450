// Network geometry, propagation, demand and power-consumption models.
//
// A Scenario is built once from a JSON configuration and is immutable
// afterwards.  Shadowing, when enabled, is drawn per (BS, test point) at
// build time so channel_gain() is a pure function of the scenario.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hetnet {

/// Configuration problems.  The message starts with the offending field path.
class config_error : public std::runtime_error {
 public:
  config_error(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class BsKind { macro, pico };

inline std::string_view to_string(BsKind k) { return k == BsKind::macro ? "macro" : "pico"; }

inline BsKind parse_bs_kind(std::string_view s, const std::string& field) {
  if (s == "macro") return BsKind::macro;
  if (s == "pico") return BsKind::pico;
  throw config_error(field, "unknown base station kind '" + std::string(s) + "'");
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// PL(d) = intercept + slope * log10(d / 1 km), in dB.
struct PathLoss {
  double intercept_db;
  double slope_db;
  double antenna_gain_db;
};

struct PropagationConfig {
  PathLoss macro{128.1, 37.6, 14.0};
  PathLoss pico{140.7, 36.7, 5.0};
  bool shadowing = false;
  double shadowing_std_db = 8.0;
  double min_distance_m = 10.0;

  const PathLoss& for_kind(BsKind k) const { return k == BsKind::macro ? macro : pico; }
};

/// Linear operational power model P_op = slope * P_tx + intercept.
struct PowerModel {
  double tx_power_w;
  double op_slope;
  double op_intercept_w;
  double fixed_fraction;
};

inline constexpr PowerModel kDefaultMacroPower{40.0, 22.6 / 3.0, 412.4 / 3.0, 1.0};
inline constexpr PowerModel kDefaultPicoPower{1.0, 5.5, 32.0, 0.5};

inline double operational_power(const PowerModel& model, double tx_power_watts) {
  if (!(tx_power_watts >= 0.0)) throw std::invalid_argument("operational_power: negative transmit power");
  return model.op_slope * tx_power_watts + model.op_intercept_w;
}

/// Default coefficients: macro (22.6/3) P + 412.4/3, pico 5.5 P + 32.
inline double operational_power(BsKind kind, double tx_power_watts) {
  return operational_power(kind == BsKind::macro ? kDefaultMacroPower : kDefaultPicoPower, tx_power_watts);
}

struct BaseStation {
  std::size_t id = 0;
  BsKind kind = BsKind::macro;
  Point position;
  double tx_psd = 0.0;          // W/Hz, flat over the band
  double op_power_max = 0.0;    // W, operational power at full usage
  double fixed_fraction = 0.0;  // share of op_power_max drawn whenever the BS is on
};

struct TestPoint {
  std::size_t id = 0;
  Point position;
  double demand = 0.0;  // bit/s
};

/// Parameters for the random drop of macros, picos and test points.
struct LayoutConfig {
  std::size_t macro_count = 3;
  std::size_t picos_per_macro = 4;
  double inter_site_distance_m = 500.0;
  double min_macro_pico_m = 75.0;
  double min_pico_pico_m = 40.0;
  std::size_t test_points = 50;
};

class Scenario {
 public:
  std::vector<BaseStation> bss;
  std::vector<TestPoint> tps;
  double bandwidth = 10e6;      // Hz
  double noise_psd = 0.0;       // W/Hz
  PropagationConfig propagation;
  PowerModel macro_power = kDefaultMacroPower;
  PowerModel pico_power = kDefaultPicoPower;
  std::uint64_t rng_seed = 0;
  /// B x K, row-major by BS; empty when shadowing is disabled.
  std::vector<double> shadowing_db;

  std::size_t num_bs() const { return bss.size(); }
  std::size_t num_tp() const { return tps.size(); }

  /// Large-scale gain G_bk (linear) including antenna gain, path loss and
  /// frozen shadowing.  Distances below the clamp use the clamp.
  double channel_gain(std::size_t b, std::size_t k) const {
    const BaseStation& bs = bss.at(b);
    const TestPoint& tp = tps.at(k);
    const PathLoss& pl = propagation.for_kind(bs.kind);
    const double d = std::max(distance(bs.position, tp.position), propagation.min_distance_m);
    double db = -(pl.intercept_db + pl.slope_db * std::log10(d / 1000.0)) + pl.antenna_gain_db;
    if (!shadowing_db.empty()) db += shadowing_db[b * tps.size() + k];
    return std::pow(10.0, db / 10.0);
  }

  std::vector<double> demands() const {
    std::vector<double> d(tps.size());
    for (std::size_t k = 0; k < tps.size(); ++k) d[k] = tps[k].demand;
    return d;
  }

  void set_uniform_demand(double bps) {
    for (auto& tp : tps) tp.demand = bps;
  }

  void validate() const {
    if (bss.empty()) throw config_error("network.base_stations", "at least one base station required");
    if (tps.empty()) throw config_error("network.test_points", "at least one test point required");
    if (!(bandwidth > 0.0)) throw config_error("network.bandwidth_hz", "must be positive");
    if (!(noise_psd > 0.0)) throw config_error("network.noise_psd_w_per_hz", "must be positive");
    for (const auto& bs : bss) {
      const std::string f = "network.base_stations[" + std::to_string(bs.id) + "]";
      if (!(bs.tx_psd > 0.0)) throw config_error(f + ".tx_psd", "must be positive");
      if (!(bs.op_power_max > 0.0)) throw config_error(f + ".op_power_max", "must be positive");
      if (!(bs.fixed_fraction >= 0.0 && bs.fixed_fraction <= 1.0))
        throw config_error(f + ".fixed_fraction", "must lie in [0, 1]");
    }
    for (const auto& tp : tps)
      if (!(tp.demand >= 0.0))
        throw config_error("demand[" + std::to_string(tp.id) + "]", "must be non-negative");
  }

  nlohmann::json to_json() const;
};

namespace detail {

using nlohmann::json;

inline double get_number(const json& obj, const char* key, double fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw config_error(path + "." + key, "expected a number");
  return v.get<double>();
}

inline std::size_t get_count(const json& obj, const char* key, std::size_t fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw config_error(path + "." + key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

inline const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  const json& v = root.at(key);
  if (!v.is_object()) throw config_error(key, "expected an object");
  return v;
}

inline PathLoss read_path_loss(const json& obj, PathLoss d, const std::string& path) {
  PathLoss p{get_number(obj, "intercept_db", d.intercept_db, path), get_number(obj, "slope_db", d.slope_db, path),
             get_number(obj, "antenna_gain_db", d.antenna_gain_db, path)};
  if (!(p.slope_db > 0.0)) throw config_error(path + ".slope_db", "must be positive");
  return p;
}

inline PowerModel read_power(const json& obj, PowerModel d, const std::string& path) {
  PowerModel p{get_number(obj, "tx_power_w", d.tx_power_w, path), get_number(obj, "op_slope", d.op_slope, path),
               get_number(obj, "op_intercept_w", d.op_intercept_w, path),
               get_number(obj, "fixed_fraction", d.fixed_fraction, path)};
  if (!(p.tx_power_w > 0.0)) throw config_error(path + ".tx_power_w", "must be positive");
  if (!(p.op_slope >= 0.0)) throw config_error(path + ".op_slope", "must be non-negative");
  if (!(p.fixed_fraction >= 0.0 && p.fixed_fraction <= 1.0))
    throw config_error(path + ".fixed_fraction", "must lie in [0, 1]");
  return p;
}

inline json path_loss_json(const PathLoss& p) {
  return {{"intercept_db", p.intercept_db}, {"slope_db", p.slope_db}, {"antenna_gain_db", p.antenna_gain_db}};
}

inline json power_json(const PowerModel& p) {
  return {{"tx_power_w", p.tx_power_w},
          {"op_slope", p.op_slope},
          {"op_intercept_w", p.op_intercept_w},
          {"fixed_fraction", p.fixed_fraction}};
}

/// Hexagonal cell test: inside the Voronoi cell of a lattice site with
/// spacing `isd` centred at `c`.
inline bool in_hex_cell(Point p, Point c, double isd) {
  constexpr double kPi = 3.14159265358979323846;
  for (int t = 0; t < 6; ++t) {
    const double a = t * kPi / 3.0;
    if ((p.x - c.x) * std::cos(a) + (p.y - c.y) * std::sin(a) > isd / 2.0) return false;
  }
  return true;
}

inline Point sample_in_hex(std::mt19937_64& rng, Point c, double isd) {
  const double r = isd / std::sqrt(3.0);
  std::uniform_real_distribution<double> u(-r, r);
  for (;;) {
    const Point p{c.x + u(rng), c.y + u(rng)};
    if (in_hex_cell(p, c, isd)) return p;
  }
}

/// First `count` sites of a hexagonal lattice, clustered around the
/// centroid of the first triangle so that three macros are mutual neighbours.
inline std::vector<Point> macro_sites(std::size_t count, double isd) {
  struct Site {
    Point p;
    double key;
  };
  std::vector<Site> sites;
  const Point centroid{isd / 2.0, isd / (2.0 * std::sqrt(3.0))};
  const int span = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))) + 2;
  for (int i = -span; i <= span; ++i)
    for (int j = -span; j <= span; ++j) {
      const Point p{isd * (i + 0.5 * j), isd * (std::sqrt(3.0) / 2.0) * j};
      sites.push_back({p, distance(p, centroid)});
    }
  std::stable_sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    if (std::abs(a.key - b.key) > 1e-9) return a.key < b.key;
    if (std::abs(a.p.y - b.p.y) > 1e-9) return a.p.y < b.p.y;
    return a.p.x < b.p.x;
  });
  std::vector<Point> out;
  for (std::size_t s = 0; s < count && s < sites.size(); ++s) out.push_back(sites[s].p);
  return out;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Builds a Scenario from a configuration document with sections
/// `network`, `propagation`, `power`, `demand` and `seed`.  The network
/// section either lists `base_stations` / `test_points` explicitly or
/// describes a random drop (`macro_count`, `picos_per_macro`, ...).
inline Scenario build_scenario(const nlohmann::json& config) {
  using detail::json;
  if (!config.is_object()) throw config_error("<root>", "expected a JSON object");
  Scenario sc;
  const json& net = detail::section(config, "network");
  const json& prop = detail::section(config, "propagation");
  const json& power = detail::section(config, "power");
  const json& demand = detail::section(config, "demand");

  if (config.contains("seed")) {
    if (!config["seed"].is_number_integer()) throw config_error("seed", "expected an integer");
    sc.rng_seed = config["seed"].get<std::uint64_t>();
  }

  sc.bandwidth = detail::get_number(net, "bandwidth_hz", 10e6, "network");
  if (!(sc.bandwidth > 0.0)) throw config_error("network.bandwidth_hz", "must be positive");
  if (net.contains("noise_psd_w_per_hz")) {
    sc.noise_psd = detail::get_number(net, "noise_psd_w_per_hz", 0.0, "network");
  } else {
    const double dbm = detail::get_number(net, "noise_psd_dbm_per_hz", -174.0, "network") +
                       detail::get_number(net, "noise_figure_db", 9.0, "network");
    sc.noise_psd = std::pow(10.0, (dbm - 30.0) / 10.0);
  }
  if (!(sc.noise_psd > 0.0)) throw config_error("network.noise_psd_w_per_hz", "must be positive");

  sc.propagation.macro = detail::read_path_loss(detail::section(prop, "macro"), sc.propagation.macro, "propagation.macro");
  sc.propagation.pico = detail::read_path_loss(detail::section(prop, "pico"), sc.propagation.pico, "propagation.pico");
  if (prop.contains("shadowing")) {
    if (!prop["shadowing"].is_boolean()) throw config_error("propagation.shadowing", "expected a boolean");
    sc.propagation.shadowing = prop["shadowing"].get<bool>();
  }
  sc.propagation.shadowing_std_db = detail::get_number(prop, "shadowing_std_db", 8.0, "propagation");
  sc.propagation.min_distance_m = detail::get_number(prop, "min_distance_m", 10.0, "propagation");
  if (!(sc.propagation.min_distance_m > 0.0)) throw config_error("propagation.min_distance_m", "must be positive");
  if (!(sc.propagation.shadowing_std_db >= 0.0)) throw config_error("propagation.shadowing_std_db", "must be non-negative");

  sc.macro_power = detail::read_power(detail::section(power, "macro"), kDefaultMacroPower, "power.macro");
  sc.pico_power = detail::read_power(detail::section(power, "pico"), kDefaultPicoPower, "power.pico");

  std::mt19937_64 rng(detail::mix_seed(sc.rng_seed, 1));
  std::vector<std::pair<BsKind, Point>> stations;
  std::vector<Point> points;

  if (net.contains("base_stations")) {
    const json& list = net["base_stations"];
    if (!list.is_array()) throw config_error("network.base_stations", "expected an array");
    for (std::size_t b = 0; b < list.size(); ++b) {
      const std::string f = "network.base_stations[" + std::to_string(b) + "]";
      const json& e = list[b];
      if (!e.is_object() || !e.contains("kind") || !e["kind"].is_string())
        throw config_error(f + ".kind", "expected 'macro' or 'pico'");
      stations.emplace_back(parse_bs_kind(e["kind"].get<std::string>(), f + ".kind"),
                            Point{detail::get_number(e, "x", 0.0, f), detail::get_number(e, "y", 0.0, f)});
    }
  } else {
    LayoutConfig lay;
    lay.macro_count = detail::get_count(net, "macro_count", lay.macro_count, "network");
    lay.picos_per_macro = detail::get_count(net, "picos_per_macro", lay.picos_per_macro, "network");
    lay.inter_site_distance_m = detail::get_number(net, "inter_site_distance_m", lay.inter_site_distance_m, "network");
    lay.min_macro_pico_m = detail::get_number(net, "min_macro_pico_m", lay.min_macro_pico_m, "network");
    lay.min_pico_pico_m = detail::get_number(net, "min_pico_pico_m", lay.min_pico_pico_m, "network");
    if (lay.macro_count == 0) throw config_error("network.macro_count", "must be at least 1");
    if (!(lay.inter_site_distance_m > 0.0)) throw config_error("network.inter_site_distance_m", "must be positive");
    const double isd = lay.inter_site_distance_m;
    const std::vector<Point> sites = detail::macro_sites(lay.macro_count, isd);
    for (Point p : sites) stations.emplace_back(BsKind::macro, p);
    std::vector<Point> picos;
    for (std::size_t m = 0; m < sites.size(); ++m) {
      for (std::size_t s = 0; s < lay.picos_per_macro; ++s) {
        bool placed = false;
        for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
          const Point p = detail::sample_in_hex(rng, sites[m], isd);
          if (distance(p, sites[m]) < lay.min_macro_pico_m) continue;
          bool ok = true;
          for (Point q : picos) ok = ok && distance(p, q) >= lay.min_pico_pico_m;
          if (!ok) continue;
          picos.push_back(p);
          placed = true;
        }
        if (!placed) throw config_error("network.picos_per_macro", "cannot place picos under the distance constraints");
      }
    }
    for (Point p : picos) stations.emplace_back(BsKind::pico, p);
    if (!net.contains("test_points") || net["test_points"].is_number()) {
      const std::size_t count = detail::get_count(net, "test_points", lay.test_points, "network");
      std::uniform_int_distribution<std::size_t> cell(0, sites.size() - 1);
      for (std::size_t k = 0; k < count; ++k) points.push_back(detail::sample_in_hex(rng, sites[cell(rng)], isd));
    }
  }

  if (net.contains("test_points") && net["test_points"].is_array()) {
    const json& list = net["test_points"];
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string f = "network.test_points[" + std::to_string(k) + "]";
      if (!list[k].is_object()) throw config_error(f, "expected an object");
      points.push_back({detail::get_number(list[k], "x", 0.0, f), detail::get_number(list[k], "y", 0.0, f)});
    }
  } else if (net.contains("test_points") && !net["test_points"].is_number()) {
    throw config_error("network.test_points", "expected a count or an array");
  }

  if (stations.empty()) throw config_error("network.base_stations", "at least one base station required");
  if (points.empty()) throw config_error("network.test_points", "at least one test point required");

  for (std::size_t b = 0; b < stations.size(); ++b) {
    const PowerModel& pm = stations[b].first == BsKind::macro ? sc.macro_power : sc.pico_power;
    BaseStation bs;
    bs.id = b;
    bs.kind = stations[b].first;
    bs.position = stations[b].second;
    bs.tx_psd = pm.tx_power_w / sc.bandwidth;
    bs.op_power_max = operational_power(pm, pm.tx_power_w);
    bs.fixed_fraction = pm.fixed_fraction;
    sc.bss.push_back(bs);
  }
  for (std::size_t k = 0; k < points.size(); ++k) sc.tps.push_back({k, points[k], 0.0});

  // Demand: uniform or per test point.
  if (demand.contains("per_test_point_bps")) {
    const json& list = demand["per_test_point_bps"];
    if (!list.is_array() || list.size() != sc.tps.size())
      throw config_error("demand.per_test_point_bps", "expected one value per test point");
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (!list[k].is_number()) throw config_error("demand.per_test_point_bps[" + std::to_string(k) + "]", "expected a number");
      sc.tps[k].demand = list[k].get<double>();
    }
  } else {
    sc.set_uniform_demand(detail::get_number(demand, "uniform_bps", 0.0, "demand"));
  }

  // Shadowing: explicit matrix if provided, else drawn from the seed.
  if (sc.propagation.shadowing) {
    const std::size_t total = sc.bss.size() * sc.tps.size();
    if (prop.contains("shadowing_db")) {
      const json& m = prop["shadowing_db"];
      if (!m.is_array() || m.size() != total) throw config_error("propagation.shadowing_db", "expected B*K values");
      for (const auto& v : m) sc.shadowing_db.push_back(v.get<double>());
    } else {
      std::mt19937_64 shadow_rng(detail::mix_seed(sc.rng_seed, 2));
      std::normal_distribution<double> n(0.0, sc.propagation.shadowing_std_db);
      sc.shadowing_db.resize(total);
      for (double& v : sc.shadowing_db) v = n(shadow_rng);
    }
  }

  sc.validate();
  return sc;
}

inline Scenario build_scenario_from_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("<document>", std::string("parse error: ") + e.what());
  }
  return build_scenario(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("<file>", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return build_scenario_from_text(ss.str());
}

/// Serializes to the configuration schema with explicit station and test
/// point lists; build_scenario(to_json()) reproduces the scenario.
inline nlohmann::json Scenario::to_json() const {
  using detail::json;
  json net;
  net["bandwidth_hz"] = bandwidth;
  net["noise_psd_w_per_hz"] = noise_psd;
  json bl = json::array();
  for (const auto& bs : bss)
    bl.push_back({{"id", bs.id}, {"kind", std::string(to_string(bs.kind))}, {"x", bs.position.x}, {"y", bs.position.y}});
  net["base_stations"] = bl;
  json tl = json::array();
  for (const auto& tp : tps) tl.push_back({{"id", tp.id}, {"x", tp.position.x}, {"y", tp.position.y}});
  net["test_points"] = tl;

  json prop;
  prop["macro"] = detail::path_loss_json(propagation.macro);
  prop["pico"] = detail::path_loss_json(propagation.pico);
  prop["shadowing"] = propagation.shadowing;
  prop["shadowing_std_db"] = propagation.shadowing_std_db;
  prop["min_distance_m"] = propagation.min_distance_m;
  if (!shadowing_db.empty()) prop["shadowing_db"] = shadowing_db;

  json dem;
  json per = json::array();
  for (const auto& tp : tps) per.push_back(tp.demand);
  dem["per_test_point_bps"] = per;

  return json{{"network", net},
              {"propagation", prop},
              {"power", {{"macro", detail::power_json(macro_power)}, {"pico", detail::power_json(pico_power)}}},
              {"demand", dem},
              {"seed", rng_seed}};
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of everything the rates depend on; demands are left out so a
/// rate cache survives demand changes.
inline std::uint64_t scenario_hash(const Scenario& sc) {
  nlohmann::json j = sc.to_json();
  j.erase("demand");
  return fnv1a(j.dump());
}

}  // namespace hetnet
