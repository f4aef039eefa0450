// hetnet: scenario generation, rate precomputation, energy-minimizing
// solves, demand sweeps, runtime scaling runs and verification suites.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 infeasible
// demand, 4 solver failure or failed verification.

#include "hetnet/hetnet.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace hetnet;
namespace ex = hetnet::experiments;

constexpr int kUsage = 2;
constexpr int kInfeasible = 3;
constexpr int kFailure = 4;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("<file>", "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(path, std::string("parse error: ") + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("--out", "cannot write '" + path + "'");
  return out;
}

/// "start:stop:step" or a comma-separated list, in bit/s.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> g;
  try {
    if (text.find(':') != std::string::npos) {
      std::stringstream ss(text);
      std::string a, b, c;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, c, ':');
      const double start = std::stod(a), stop = std::stod(b), step = std::stod(c);
      if (!(step > 0.0)) throw config_error("grid", "step must be positive");
      for (std::size_t t = 0; start + static_cast<double>(t) * step <= stop + 1e-9 * step; ++t)
        g.push_back(start + static_cast<double>(t) * step);
    } else {
      std::stringstream ss(text);
      for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) g.push_back(std::stod(tok));
    }
  } catch (const std::logic_error&) {
    throw config_error("grid", "cannot parse '" + text + "'");
  }
  return g;
}

template <class T>
std::vector<T> split(const std::string& text, const std::function<T(const std::string&)>& conv) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(conv(tok));
  return out;
}

struct SolverFlags {
  std::string engine = "cutplane";
  double epsilon = 1e-3;
  double rho_off = 1e-4;
  std::size_t max_outer = 15;
  double tol_gap = 1e-6;

  void add(CLI::App* app) {
    app->add_option("--engine", engine, "cutplane or direct")->capture_default_str();
    app->add_option("--epsilon", epsilon, "l0 smoothing parameter")->capture_default_str();
    app->add_option("--rho-off", rho_off, "usage below which a BS is switched off")->capture_default_str();
    app->add_option("--max-outer", max_outer, "reweighting iterations")->capture_default_str();
    app->add_option("--tol-gap", tol_gap, "relative cutting-plane gap")->capture_default_str();
  }

  SolverParams params() const {
    SolverParams p;
    p.engine = parse_engine(engine);
    p.epsilon = epsilon;
    p.rho_off = rho_off;
    p.max_outer = max_outer;
    p.cut.tol_gap = tol_gap;
    p.validate();
    return p;
  }
};

int cmd_gen(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out) {
  nlohmann::json c = read_json(config);
  if (seed) c["seed"] = *seed;
  const Scenario sc = build_scenario(c);
  open_out(out) << sc.to_json().dump(2) << '\n';
  std::cerr << "wrote " << out << ": " << sc.num_bs() << " BSs, " << sc.num_tp() << " test points\n";
  return 0;
}

struct RateFlags {
  std::string fading = "deterministic";
  std::size_t samples = 1000;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--fading", fading, "deterministic or monte_carlo")->capture_default_str();
    app->add_option("--samples", samples, "Monte Carlo draws per rate")->capture_default_str();
    app->add_option("--fading-seed", seed, "Monte Carlo seed")->capture_default_str();
  }

  RateConfig config() const {
    RateConfig c;
    if (fading == "deterministic") c.mode = FadingMode::deterministic;
    else if (fading == "monte_carlo") c.mode = FadingMode::monte_carlo;
    else throw config_error("--fading", "expected 'deterministic' or 'monte_carlo'");
    if (samples == 0) throw config_error("--samples", "must be positive");
    c.samples = samples;
    c.seed = seed;
    return c;
  }
};

RateTensor obtain_rates(const Scenario& sc, const PatternSet& A, const RateFlags& rf, const std::string& cache) {
  if (cache.empty()) return build_rate_tensor(sc, A, rf.config());
  bool recomputed = false;
  RateTensor r = load_or_build_rate_tensor(cache, sc, A, rf.config(), &recomputed);
  std::cerr << (recomputed ? "computed rates, cached in " : "loaded rates from ") << cache << '\n';
  return r;
}

int cmd_rates(const std::string& scenario, const std::string& patterns, const RateFlags& rf, const std::string& out,
              const std::string& csv) {
  const Scenario sc = load_scenario(scenario);
  const PatternSet A = ex::make_patterns(sc, patterns);
  const RateTensor r = obtain_rates(sc, A, rf, out);
  if (!csv.empty()) {
    std::ofstream os = open_out(csv);
    write_rate_csv(r, os);
  }
  std::cerr << "K = " << r.num_tp() << ", B = " << r.num_bs() << ", I = " << r.num_patterns() << '\n';
  return 0;
}

int cmd_solve(const std::string& scenario, const std::string& patterns, const RateFlags& rf, const std::string& cache,
              std::optional<double> demand, const std::string& demand_file, const SolverFlags& sf,
              const std::string& out) {
  Scenario sc = load_scenario(scenario);
  if (demand) {
    if (!(*demand >= 0.0)) throw config_error("--demand", "must be non-negative");
    sc.set_uniform_demand(*demand);
  }
  if (!demand_file.empty()) {
    const nlohmann::json m = read_json(demand_file);
    if (!m.is_object()) throw config_error(demand_file, "expected an object mapping test point id to bit/s");
    for (const auto& [key, value] : m.items()) {
      std::size_t k = 0;
      try {
        k = std::stoul(key);
      } catch (const std::logic_error&) {
        throw config_error(demand_file, "bad test point id '" + key + "'");
      }
      if (k >= sc.num_tp()) throw config_error(demand_file, "test point id " + key + " out of range");
      if (!value.is_number() || !(value.get<double>() >= 0.0))
        throw config_error(demand_file + "[" + key + "]", "expected a non-negative number");
      sc.tps[k].demand = value.get<double>();
    }
  }
  const SolverParams params = sf.params();
  const PatternSet A = ex::make_patterns(sc, patterns);
  const RateTensor r = obtain_rates(sc, A, rf, cache);
  const std::vector<double> d = sc.demands();
  const EnergyResult res = minimize_energy(sc, r, d, params);
  nlohmann::json j = to_json(res, &A);
  j["engine"] = to_string(params.engine);
  j["num_patterns"] = A.num_patterns();
  const std::string text = j.dump(2);
  if (out.empty()) std::cout << text << '\n';
  else open_out(out) << text << '\n';
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  if (!res.feasible) {
    std::cerr << "infeasible: rate balancing reaches " << res.R_sum << " bit/s in total\n";
    return kInfeasible;
  }
  std::cerr << "total power " << res.total_power << " W, " << res.active_bs.size() << " BSs on\n";
  return 0;
}

int cmd_sweep(const std::string& scenario, const std::string& grid, const std::string& schemes,
              std::size_t repetitions, std::optional<std::uint64_t> seed, const std::string& patterns,
              const SolverFlags& sf, const std::string& out) {
  nlohmann::json config = read_json(scenario);
  if (seed) config["seed"] = *seed;
  ex::SweepSpec spec;
  spec.grid = parse_grid(grid);
  spec.schemes = split<std::string>(schemes, [](const std::string& s) { return s; });
  spec.repetitions = repetitions;
  spec.patterns = patterns;
  spec.params = sf.params();
  const auto rows = ex::run_sweep(config, spec, [](const ex::SweepRow& r) {
    std::cerr << "rep " << r.repetition << " demand " << r.demand << ' ' << r.scheme << ": "
              << (r.feasible ? std::to_string(r.total_power) + " W" : std::string("infeasible")) << '\n';
  });
  std::ofstream os = open_out(out);
  ex::write_sweep_csv(rows, os);
  return 0;
}

int cmd_bench(const std::string& scenario, const std::string& counts, const std::string& engines, double demand,
              std::size_t repetitions, const std::string& out) {
  const Scenario sc = load_scenario(scenario);
  ex::BenchSpec spec;
  spec.counts = split<std::size_t>(counts, [](const std::string& s) {
    try {
      return static_cast<std::size_t>(std::stoull(s));
    } catch (const std::logic_error&) {
      throw config_error("--counts", "bad pattern count '" + s + "'");
    }
  });
  spec.engines = split<Engine>(engines, [](const std::string& s) { return parse_engine(s); });
  spec.demand = demand;
  spec.repetitions = repetitions;
  const auto rows = ex::run_bench(sc, spec, [](const ex::BenchRow& r) {
    std::cerr << "I = " << r.I << ' ' << to_string(r.engine) << ": " << r.wall_ms << " ms, " << r.iterations
              << " iterations\n";
  });
  std::ofstream os = open_out(out);
  ex::write_bench_csv(rows, os);
  for (Engine e : spec.engines) {
    std::vector<double> x, y;
    for (const auto& r : rows)
      if (r.engine == e) {
        x.push_back(static_cast<double>(r.I));
        y.push_back(r.wall_ms);
      }
    if (x.size() >= 2)
      std::cerr << to_string(e) << " time exponent in I: " << ex::power_law_exponent(x, y) << '\n';
  }
  return 0;
}

int cmd_verify(std::size_t instances, std::uint64_t seed, bool corrupt) {
  ex::VerifyOptions opt;
  opt.instances = instances;
  opt.seed = seed;
  opt.corrupt = corrupt;
  if (instances == 0) {
    std::cerr << "warning: zero instances requested; nothing to verify\n";
    return 0;
  }
  bool ok = true;
  for (const auto& s : ex::run_verify(opt)) {
    std::cout << (s.passed() ? "PASS " : "FAIL ") << s.name << ": " << s.cases << " cases, " << s.failures
              << " failures\n";
    for (const auto& n : s.notes) std::cout << "    " << n << '\n';
    ok = ok && s.passed();
  }
  return ok ? 0 : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-minimizing interference patterns for heterogeneous networks"};
  app.require_subcommand(1);

  std::string config, scenario, out, csv, patterns = "auto", cache, demand_file, grid, schemes = "proposed,reuse1";
  std::string counts, engines = "cutplane,direct";
  std::optional<std::uint64_t> seed;
  std::optional<double> demand;
  std::size_t repetitions = 1, instances = 100;
  std::uint64_t verify_seed = 1;
  bool corrupt = false;
  double bench_demand = 0.5e6;
  RateFlags rf;
  SolverFlags sf;

  auto* gen = app.add_subcommand("gen", "Build a scenario from a layout config");
  gen->add_option("--config", config, "layout config (JSON)")->required();
  gen->add_option("--seed", seed, "override the config seed");
  gen->add_option("--out", out, "scenario file to write")->required();

  auto* rates = app.add_subcommand("rates", "Precompute and cache the rate tensor");
  rates->add_option("--scenario", scenario, "scenario or config file")->required();
  rates->add_option("--patterns", patterns, "all, reuse1, auto or a strategy list")->capture_default_str();
  rates->add_option("--out", out, "binary rate cache")->required();
  rates->add_option("--csv", csv, "also write k,b,i,rate rows");
  rf.add(rates);

  auto* solve = app.add_subcommand("solve", "Minimize network power for one demand vector");
  solve->add_option("--scenario", scenario, "scenario or config file")->required();
  solve->add_option("--patterns", patterns, "all, reuse1, auto or a strategy list")->capture_default_str();
  solve->add_option("--rates", cache, "rate cache to use or create");
  solve->add_option("--demand", demand, "uniform demand per test point (bit/s)");
  solve->add_option("--demand-file", demand_file, "JSON object: test point id -> bit/s");
  solve->add_option("--out", out, "result JSON (stdout if omitted)");
  rf.add(solve);
  sf.add(solve);

  auto* sweep = app.add_subcommand("sweep", "Power versus uniform demand for several schemes");
  std::string sweep_patterns = "auto";
  sweep->add_option("--scenario", scenario, "layout config or scenario file")->required();
  sweep->add_option("--grid", grid, "start:stop:step or a list, bit/s")->required();
  sweep->add_option("--schemes", schemes, "proposed and/or reuse1")->capture_default_str();
  sweep->add_option("--repetitions", repetitions, "layout drops, seeds seed..seed+n-1")->capture_default_str();
  sweep->add_option("--seed", seed, "override the config seed");
  sweep->add_option("--patterns", sweep_patterns, "candidate set of the proposed scheme")->capture_default_str();
  sweep->add_option("--out", out, "CSV file")->required();
  sf.add(sweep);

  auto* bench = app.add_subcommand("bench", "Weighted-LP wall time versus pattern count");
  bench->add_option("--scenario", scenario, "scenario or config file")->required();
  bench->add_option("--counts", counts, "pattern counts, e.g. 64,512,4096")->required();
  bench->add_option("--engines", engines, "engines to time")->capture_default_str();
  bench->add_option("--demand", bench_demand, "uniform demand per test point (bit/s)")->capture_default_str();
  bench->add_option("--repetitions", repetitions, "timed runs per point (median reported)")->capture_default_str();
  bench->add_option("--out", out, "CSV file")->required();

  auto* verify = app.add_subcommand("verify", "Randomized property suites");
  verify->add_option("--instances", instances, "random instances per suite")->capture_default_str();
  verify->add_option("--seed", verify_seed, "suite seed")->capture_default_str();
  verify->add_flag("--corrupt", corrupt, "plant a negative rate in every instance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return cmd_gen(config, seed, out);
    if (*rates) return cmd_rates(scenario, patterns, rf, out, csv);
    if (*solve) return cmd_solve(scenario, patterns, rf, cache, demand, demand_file, sf, out);
    if (*sweep) return cmd_sweep(scenario, grid, schemes, repetitions, seed, sweep_patterns, sf, out);
    if (*bench) return cmd_bench(scenario, counts, engines, bench_demand, repetitions, out);
    if (*verify) return cmd_verify(instances, verify_seed, corrupt);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
