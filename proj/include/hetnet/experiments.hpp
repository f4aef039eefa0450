// Demand sweeps, runtime scaling runs and the randomized verification
// suites behind the CLI's sweep, bench and verify commands.
#pragma once

#include "hetnet/energy_solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace hetnet::experiments {

/// Candidate set used for the "proposed" scheme unless overridden.
inline constexpr const char* kDefaultStrategies =
    "all_on,leave_one_out,single_bs,macros_only,macro_plus_local_picos,random:64:1";

/// "all", "reuse1", "auto" or a strategy list.  "auto" enumerates every
/// pattern when there are at most 64 and uses kDefaultStrategies otherwise.
inline PatternSet make_patterns(const Scenario& sc, const std::string& spec) {
  if (spec == "auto") return make_patterns(sc, sc.num_bs() <= 6 ? "all" : kDefaultStrategies);
  if (spec == "all") {
    try {
      return enumerate_all(sc.num_bs());
    } catch (const std::invalid_argument& e) {
      throw config_error("patterns", e.what());
    }
  }
  if (spec == "reuse1") return reuse1(sc.num_bs());
  return preselect(sc, parse_strategies(spec));
}

/// Exactly `count` patterns: Reuse-1 for 1, full enumeration for 2^B,
/// otherwise the all-ON row plus count - 1 random rows.
inline PatternSet patterns_of_size(const Scenario& sc, std::size_t count, std::uint64_t seed) {
  const std::size_t B = sc.num_bs();
  if (count == 0) throw config_error("counts", "pattern count must be positive");
  if (count == 1) return reuse1(B);
  if (B < 63 && count == (std::size_t{1} << B)) return enumerate_all(B);
  if (B < 63 && count >= (std::size_t{1} << B))
    throw config_error("counts", std::to_string(count) + " patterns exceed 2^" + std::to_string(B));
  return preselect(sc, parse_strategies("random:" + std::to_string(count - 1) + ":" + std::to_string(seed)));
}

/// Least-squares slope of log y against log x.
inline double power_law_exponent(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("power_law_exponent: need two or more points");
  double mx = 0, my = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    mx += std::log(x[t]);
    my += std::log(y[t]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    sxy += (std::log(x[t]) - mx) * (std::log(y[t]) - my);
    sxx += (std::log(x[t]) - mx) * (std::log(x[t]) - mx);
  }
  return sxy / sxx;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// ---- demand sweep ---------------------------------------------------------

struct SweepSpec {
  std::vector<double> grid;                          // bit/s, uniform over test points
  std::vector<std::string> schemes{"proposed", "reuse1"};
  std::size_t repetitions = 1;
  std::string patterns = "auto";                      // candidate set of "proposed"
  SolverParams params;

  void validate() const {
    if (grid.empty()) throw config_error("grid", "demand grid is empty");
    for (std::size_t t = 0; t < grid.size(); ++t) {
      if (!(grid[t] >= 0.0)) throw config_error("grid", "demands must be non-negative");
      if (t > 0 && !(grid[t] > grid[t - 1])) throw config_error("grid", "demands must be ascending");
    }
    if (schemes.empty()) throw config_error("schemes", "at least one scheme required");
    for (const auto& s : schemes)
      if (s != "proposed" && s != "reuse1") throw config_error("schemes", "unknown scheme '" + s + "'");
    if (repetitions == 0) throw config_error("repetitions", "must be at least 1");
    params.validate();
  }
};

struct SweepRow {
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  double demand = 0.0;
  std::string scheme;
  bool feasible = false;
  double total_power = 0.0;
  std::size_t iterations = 0;  // outer iterations
  double wall_ms = 0.0;
  std::vector<double> surrogate;
  bool outer_converged = false;
};

/// Scenario for repetition `rep`: the configured seed plus `rep`.  Only
/// layouts drawn from a seed can be repeated.
inline Scenario drop_scenario(const nlohmann::json& config, std::size_t rep) {
  if (rep == 0) return build_scenario(config);
  const auto net = config.find("network");
  if (net != config.end() && net->contains("base_stations"))
    throw config_error("repetitions", "an explicit layout cannot be re-drawn; use a layout config");
  nlohmann::json c = config;
  c["seed"] = config.value("seed", std::uint64_t{0}) + rep;
  return build_scenario(c);
}

/// One row per (repetition, demand, scheme), in that nesting order.  Rate
/// tensors are built once per repetition and scheme, outside the timing.
inline std::vector<SweepRow> run_sweep(const nlohmann::json& config, const SweepSpec& spec,
                                       const std::function<void(const SweepRow&)>& on_row = {}) {
  spec.validate();
  std::vector<SweepRow> rows;
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    Scenario sc = drop_scenario(config, rep);
    std::vector<RateTensor> tensors;
    for (const auto& s : spec.schemes)
      tensors.push_back(build_rate_tensor(sc, s == "reuse1" ? reuse1(sc.num_bs()) : make_patterns(sc, spec.patterns)));
    for (double demand : spec.grid) {
      const std::vector<double> d(sc.num_tp(), demand);
      for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
        const EnergyResult e = minimize_energy(sc, tensors[s], d, spec.params);
        SweepRow row{rep, sc.rng_seed, demand, spec.schemes[s], e.feasible, e.total_power,
                     e.outer_iterations, e.wall_ms, e.surrogate, e.outer_converged};
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "demand,scheme,total_power_W,feasible,iterations,wall_ms\n";
  os.precision(10);
  for (const SweepRow& r : rows) {
    os << r.demand << ',' << r.scheme << ',';
    if (r.feasible) os << r.total_power;
    else os << "nan";
    os << ',' << (r.feasible ? 1 : 0) << ',' << r.iterations << ',' << r.wall_ms << '\n';
  }
}

/// Largest grid demand at which `scheme` is feasible in repetition `rep`;
/// zero if none.
inline double max_feasible_demand(const std::vector<SweepRow>& rows, std::size_t rep, const std::string& scheme) {
  double best = 0.0;
  for (const SweepRow& r : rows)
    if (r.repetition == rep && r.scheme == scheme && r.feasible) best = std::max(best, r.demand);
  return best;
}

// ---- runtime scaling ------------------------------------------------------

struct BenchRow {
  std::size_t I = 0;
  Engine engine = Engine::cutplane;
  double wall_ms = 0.0;  // median over repetitions
  std::size_t iterations = 0;
  double objective = 0.0;
};

struct BenchSpec {
  std::vector<std::size_t> counts;
  std::vector<Engine> engines{Engine::cutplane, Engine::direct};
  double demand = 0.5e6;
  std::size_t repetitions = 3;
  std::uint64_t pattern_seed = 1;
  SolverParams params;
};

/// Times one weighted LP per (I, engine) with the first outer iteration's
/// weights.  Rate construction and the weights are excluded; the
/// cutting-plane time includes its rate-balancing start.
inline std::vector<BenchRow> run_bench(const Scenario& sc, const BenchSpec& spec,
                                       const std::function<void(const BenchRow&)>& on_row = {}) {
  if (spec.counts.empty()) throw config_error("counts", "at least one pattern count required");
  if (spec.repetitions == 0) throw config_error("repetitions", "must be at least 1");
  std::vector<BenchRow> rows;
  const std::vector<double> d(sc.num_tp(), spec.demand);
  for (std::size_t count : spec.counts) {
    const PatternSet A = patterns_of_size(sc, count, spec.pattern_seed);
    const RateTensor r = build_rate_tensor(sc, A);
    const BalanceResult bal = rate_balance(r, d, Engine::cutplane);
    if (!is_feasible(bal, d))
      throw config_error("demand", "infeasible with " + std::to_string(count) + " patterns; lower the demand");
    const StrictStart ss = strict_start(bal, r, d, {}, spec.params.shrink);
    const std::vector<double> w = mm_weights(ss.allocation.rho, sc, spec.params.epsilon);
    for (Engine e : spec.engines) {
      SolverParams p = spec.params;
      p.engine = e;
      std::vector<double> times;
      BenchRow row;
      row.I = A.num_patterns();
      row.engine = e;
      for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const WeightedResult res = solve_weighted_lp(r, w, d, p);
        times.push_back(elapsed_ms(t0));
        if (!res.optimal()) throw lp::solver_error("bench: weighted LP not solved");
        row.iterations = res.iterations;
        row.objective = res.objective;
      }
      std::sort(times.begin(), times.end());
      row.wall_ms = times[times.size() / 2];
      if (on_row) on_row(row);
      rows.push_back(row);
    }
  }
  return rows;
}

inline void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& os) {
  os << "I,engine,wall_ms,iterations\n";
  os.precision(10);
  for (const BenchRow& r : rows) os << r.I << ',' << to_string(r.engine) << ',' << r.wall_ms << ',' << r.iterations << '\n';
}

// ---- verification suites --------------------------------------------------

struct SuiteReport {
  SuiteReport() = default;
  explicit SuiteReport(std::string n) : name(std::move(n)) {}

  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::vector<std::string> notes;  // first few failure messages
  double wall_ms = 0.0;
  bool passed() const { return failures == 0; }

  void fail(std::string msg) {
    ++failures;
    if (notes.size() < 5) notes.push_back(std::move(msg));
  }
};

inline nlohmann::json to_json(const SuiteReport& s) {
  return {{"suite", s.name}, {"cases", s.cases}, {"failures", s.failures}, {"notes", s.notes}, {"wall_ms", s.wall_ms}};
}

struct VerifyOptions {
  std::size_t instances = 100;
  std::uint64_t seed = 1;
  bool corrupt = false;  // plant a negative rate in every instance
};

struct Instance {
  Scenario scenario;
  RateTensor rates;
  PatternSet patterns;
};

/// One macro with 0-3 picos and 1-6 test points, all 2^B patterns.
inline Instance random_instance(std::mt19937_64& rng, bool corrupt) {
  std::uniform_int_distribution<std::size_t> picos(0, 3), tps(1, 6);
  std::uniform_int_distribution<std::uint64_t> seed;
  Instance in;
  in.scenario = build_scenario(nlohmann::json{
      {"network", {{"macro_count", 1}, {"picos_per_macro", picos(rng)}, {"test_points", tps(rng)}}},
      {"seed", seed(rng)}});
  in.patterns = enumerate_all(in.scenario.num_bs());
  in.rates = build_rate_tensor(in.scenario, in.patterns);
  if (corrupt) {
    std::uniform_int_distribution<std::size_t> pick(0, in.rates.raw().size() - 1);
    in.rates.raw()[pick(rng)] = -1.0;
  }
  return in;
}

/// Demand proportional to random weights, scaled to `fraction` of the
/// rate-balancing limit.
inline std::vector<double> scaled_demand(std::mt19937_64& rng, const RateTensor& r, double fraction) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> v(r.num_tp());
  for (double& x : v) x = u(rng);
  const double R = rate_balance(r, v, Engine::direct).R_sum;
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x *= fraction * R / total;
  return v;
}

/// z non-increasing and h <= z at every iteration, with slack 1e-9 * scale.
inline bool check_trace(const std::vector<cutplane::TraceRow>& trace, std::string& why) {
  for (std::size_t l = 0; l < trace.size(); ++l) {
    const double scale = std::max(1.0, std::abs(trace[l].z));
    if (trace[l].h > trace[l].z + 1e-9 * scale) {
      why = "h above z at iteration " + std::to_string(l);
      return false;
    }
    if (l > 0 && trace[l].z > trace[l - 1].z + 1e-9 * std::max(1.0, std::abs(trace[l - 1].z))) {
      why = "z increased at iteration " + std::to_string(l);
      return false;
    }
  }
  return true;
}

/// Weighted-LP suites: cutting plane vs direct objective (rel 1e-6),
/// pattern count of direct solutions (<= K + B + 1) and the duality
/// properties of each cutting-plane trace.
struct LpSuites {
  SuiteReport equivalence{"oracle_equivalence"};
  SuiteReport sparsity{"pattern_sparsity"};
  SuiteReport duality{"duality_weighted_lp"};
};

inline LpSuites run_lp_suites(const VerifyOptions& opt) {
  LpSuites out;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(detail::mix_seed(opt.seed, 101));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < opt.instances; ++n) {
    const std::string tag = "instance " + std::to_string(n) + ": ";
    try {
      const Instance in = random_instance(rng, opt.corrupt);
      const std::size_t B = in.scenario.num_bs(), K = in.scenario.num_tp();
      const std::vector<double> d = scaled_demand(rng, in.rates, 0.1 + 0.85 * u(rng));
      std::vector<double> rho(B);
      for (double& x : rho) x = u(rng);
      const std::vector<double> w = mm_weights(rho, in.scenario, 1e-3);
      SolverParams p;
      p.cut.tol_gap = 1e-9;
      p.engine = Engine::direct;
      const WeightedResult ref = solve_weighted_lp(in.rates, w, d, p);
      p.engine = Engine::cutplane;
      const WeightedResult cp = solve_weighted_lp(in.rates, w, d, p);
      ++out.equivalence.cases;
      ++out.sparsity.cases;
      ++out.duality.cases;
      if (!ref.optimal() || !cp.optimal()) {
        out.equivalence.fail(tag + "an engine did not solve a feasible instance");
        continue;
      }
      if (std::abs(cp.objective - ref.objective) > 1e-6 * std::max(std::abs(ref.objective), 1e-12))
        out.equivalence.fail(tag + "objectives " + std::to_string(cp.objective) + " vs " + std::to_string(ref.objective));
      if (count_active_patterns(ref.allocation) > K + B + 1)
        out.sparsity.fail(tag + std::to_string(count_active_patterns(ref.allocation)) + " active patterns");
      std::string why;
      if (!check_trace(cp.trace, why)) out.duality.fail(tag + why);
    } catch (const std::exception& e) {
      out.equivalence.fail(tag + e.what());
      ++out.equivalence.cases;
    }
  }
  out.equivalence.wall_ms = out.sparsity.wall_ms = out.duality.wall_ms = elapsed_ms(t0);
  return out;
}

/// min over the vertices of X of the linearized objective, by listing
/// every (pattern, per-BS choice of idle or one test point).
inline double enumerate_inner_vertices(const RateTensor& r, std::span<const double> w, std::span<const double> mu,
                                       std::span<const double> d) {
  const std::size_t K = r.num_tp(), B = r.num_bs();
  double best = lp::kInf;
  std::vector<std::size_t> choice(B);
  for (std::size_t i = 0; i < r.num_patterns(); ++i) {
    std::fill(choice.begin(), choice.end(), 0);
    for (;;) {
      double v = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        if (choice[b]) v += w[b] - mu[choice[b] - 1] * r(choice[b] - 1, b, i);
      best = std::min(best, v);
      std::size_t b = 0;
      while (b < B && ++choice[b] == K + 1) choice[b++] = 0;
      if (b == B) break;
    }
  }
  double dmu = 0.0;
  for (std::size_t k = 0; k < K; ++k) dmu += d[k] * mu[k];
  return best + dmu;
}

/// Closed-form inner solution vs vertex enumeration on random triples
/// with I * B * K <= 200.
inline SuiteReport run_inner_suite(const VerifyOptions& opt, std::size_t triples) {
  SuiteReport out{"inner_closed_form"};
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(detail::mix_seed(opt.seed, 202));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_b(1, 5), pick_k(1, 8);
  for (std::size_t n = 0; n < triples; ++n) {
    const std::size_t B = pick_b(rng), K = pick_k(rng);
    const std::size_t I = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(8, 200 / (B * K)))(rng);
    if (I * B * K > 200) continue;
    RateTensor r(K, B, I);
    for (double& x : r.raw()) x = u(rng) < 0.3 ? 0.0 : 1e6 * u(rng) * 20;
    if (opt.corrupt) r.raw()[0] = -1.0;
    std::vector<double> w(B), mu(K), d(K);
    for (double& x : w) x = 10 + 400 * u(rng);
    for (double& x : mu) x = u(rng) < 0.2 ? 0.0 : u(rng) * 4e-5;
    for (double& x : d) x = u(rng) * 2e6;
    ++out.cases;
    try {
      detail::check_rates(r);
      const double got = closed_form_inner(mu, w, r, d).value;
      const double want = enumerate_inner_vertices(r, w, mu, d);
      if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want)))
        out.fail("triple " + std::to_string(n) + ": " + std::to_string(got) + " vs " + std::to_string(want));
    } catch (const std::exception& e) {
      out.fail("triple " + std::to_string(n) + ": " + e.what());
    }
  }
  out.wall_ms = elapsed_ms(t0);
  return out;
}

/// is_feasible vs direct feasibility of the demand constraints, engine
/// agreement on R_sum (rel 1e-6) and the duality properties of the
/// cutting-plane balance traces.  Demands within 1e-4 of the limit are
/// redrawn since either answer is then within round-off.
struct FeasibilitySuites {
  SuiteReport equivalence{"feasibility_equivalence"};
  SuiteReport agreement{"balance_engine_agreement"};
  SuiteReport duality{"duality_rate_balance"};
};

inline FeasibilitySuites run_feasibility_suites(const VerifyOptions& opt) {
  FeasibilitySuites out;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(detail::mix_seed(opt.seed, 303));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < opt.instances; ++n) {
    const std::string tag = "instance " + std::to_string(n) + ": ";
    ++out.equivalence.cases;
    ++out.agreement.cases;
    ++out.duality.cases;
    try {
      const Instance in = random_instance(rng, opt.corrupt);
      double f = 1.0;
      while (std::abs(f - 1.0) < 1e-4) f = 0.5 + u(rng);
      const std::vector<double> d = scaled_demand(rng, in.rates, f);
      const bool direct = solve_direct_weighted_lp(in.rates, {}, d).optimal();
      const BalanceResult a = rate_balance(in.rates, d, Engine::cutplane);
      const BalanceResult b = rate_balance(in.rates, d, Engine::direct);
      if (is_feasible(a, d) != direct || is_feasible(b, d) != direct)
        out.equivalence.fail(tag + "feasibility verdicts disagree (direct LP says " + (direct ? "feasible" : "infeasible") + ")");
      if (std::abs(a.R_sum - b.R_sum) > 1e-6 * std::max(b.R_sum, 1e-12))
        out.agreement.fail(tag + "R_sum " + std::to_string(a.R_sum) + " vs " + std::to_string(b.R_sum));
      std::string why;
      if (!check_trace(a.trace, why)) out.duality.fail(tag + why);
    } catch (const std::exception& e) {
      out.equivalence.fail(tag + e.what());
    }
  }
  out.equivalence.wall_ms = out.agreement.wall_ms = out.duality.wall_ms = elapsed_ms(t0);
  return out;
}

/// Surrogate descent across outer iterations (rel 1e-9), demand
/// satisfaction (rel 1e-6) and the power identity of the final point.
inline SuiteReport run_mm_suite(const VerifyOptions& opt, std::size_t instances) {
  SuiteReport out{"mm_descent"};
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(detail::mix_seed(opt.seed, 404));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::string tag = "instance " + std::to_string(n) + ": ";
    ++out.cases;
    try {
      const Instance in = random_instance(rng, opt.corrupt);
      const std::vector<double> d = scaled_demand(rng, in.rates, 0.1 + 0.8 * u(rng));
      for (Engine e : {Engine::cutplane, Engine::direct}) {
        SolverParams p;
        p.engine = e;
        const EnergyResult res = minimize_energy(in.scenario, in.rates, d, p);
        if (!res.feasible) {
          out.fail(tag + "feasible demand reported infeasible");
          continue;
        }
        for (std::size_t t = 1; t < res.surrogate.size(); ++t)
          if (res.surrogate[t] > res.surrogate[t - 1] + 1e-9 * std::abs(res.surrogate[t - 1]))
            out.fail(tag + "surrogate increased at outer iteration " + std::to_string(t));
        const auto R = achieved_rates(res.allocation, in.rates);
        for (std::size_t k = 0; k < d.size(); ++k)
          if (R[k] < d[k] * (1 - 1e-6)) out.fail(tag + "demand of test point " + std::to_string(k) + " not met");
        if (res.allocation.max_violation() > 1e-9) out.fail(tag + "allocation violates X");
      }
    } catch (const std::exception& e) {
      out.fail(tag + e.what());
    }
  }
  out.wall_ms = elapsed_ms(t0);
  return out;
}

/// Nonnegativity, zero rows of inactive BSs and interference monotonicity.
inline SuiteReport run_rate_suite(const VerifyOptions& opt) {
  SuiteReport out{"rate_invariants"};
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(detail::mix_seed(opt.seed, 505));
  for (std::size_t n = 0; n < opt.instances; ++n) {
    ++out.cases;
    const Instance in = random_instance(rng, opt.corrupt);
    const std::size_t bad = count_rate_violations(in.rates, in.patterns) +
                            count_monotonicity_violations(in.rates, in.patterns);
    if (bad) out.fail("instance " + std::to_string(n) + ": " + std::to_string(bad) + " violating entries");
  }
  out.wall_ms = elapsed_ms(t0);
  return out;
}

/// All suites; `instances` random instances each, at least 500 inner
/// triples.
inline std::vector<SuiteReport> run_verify(const VerifyOptions& opt) {
  std::vector<SuiteReport> out;
  if (opt.instances == 0) return out;
  out.push_back(run_rate_suite(opt));
  LpSuites lp = run_lp_suites(opt);
  out.push_back(std::move(lp.equivalence));
  out.push_back(std::move(lp.sparsity));
  out.push_back(std::move(lp.duality));
  out.push_back(run_inner_suite(opt, std::max<std::size_t>(500, 5 * opt.instances)));
  FeasibilitySuites fs = run_feasibility_suites(opt);
  out.push_back(std::move(fs.equivalence));
  out.push_back(std::move(fs.agreement));
  out.push_back(std::move(fs.duality));
  out.push_back(run_mm_suite(opt, std::max<std::size_t>(1, opt.instances / 5)));
  return out;
}

}  // namespace hetnet::experiments
