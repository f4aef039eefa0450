// Rate-constrained energy minimization: the log surrogate of the on/off
// term, the reweighted-l1 (majorize-minimize) outer loop, the closed-form
// inner problem for the cutting plane, and the final on/off rounding.
#pragma once

#include "hetnet/cutting_plane.hpp"
#include "hetnet/direct_lp.hpp"
#include "hetnet/feasibility.hpp"
#include "hetnet/patterns.hpp"
#include "hetnet/rates.hpp"
#include "hetnet/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetnet {

struct SolverParams {
  double epsilon = 1e-3;
  double outer_tol = 1e-4;
  std::size_t max_outer = 15;
  double rho_off = 1e-4;
  double shrink = 0.5;
  cutplane::Params cut;
  Engine engine = Engine::cutplane;

  void validate() const {
    if (!(epsilon > 0.0)) throw config_error("epsilon", "must be positive");
    if (!(rho_off > 0.0 && rho_off <= 0.01)) throw config_error("rho_off", "must lie in (0, 0.01]");
    if (!(outer_tol > 0.0)) throw config_error("outer_tol", "must be positive");
    if (max_outer == 0) throw config_error("max_outer", "must be at least 1");
    if (!(cut.tol_gap > 0.0)) throw config_error("tol_gap", "must be positive");
  }
};

/// log(1 + x/eps) / log(1 + 1/eps).
inline double l0_surrogate(double x, double epsilon) {
  if (!(x >= 0.0)) throw std::invalid_argument("l0_surrogate: negative argument");
  return std::log1p(x / epsilon) / std::log1p(1.0 / epsilon);
}

/// f(rho) = sum_b (1-q_b) P_b rho_b + q_b P_b log(eps + rho_b) / log(1 + 1/eps).
inline double surrogate_objective(std::span<const double> rho, const Scenario& sc, double epsilon) {
  const double denom = std::log1p(1.0 / epsilon);
  double f = 0.0;
  for (std::size_t b = 0; b < sc.num_bs(); ++b) {
    const double P = sc.bss[b].op_power_max, q = sc.bss[b].fixed_fraction;
    f += (1.0 - q) * P * rho[b] + q * P * std::log(epsilon + rho[b]) / denom;
  }
  return f;
}

/// w_b = (1-q_b) P_b + q_b P_b / (log(1 + 1/eps) (eps + rho_b)).
inline std::vector<double> mm_weights(std::span<const double> rho_prev, const Scenario& sc, double epsilon) {
  const double denom = std::log1p(1.0 / epsilon);
  std::vector<double> w(sc.num_bs());
  for (std::size_t b = 0; b < sc.num_bs(); ++b) {
    const double P = sc.bss[b].op_power_max, q = sc.bss[b].fixed_fraction;
    w[b] = (1.0 - q) * P + q * P / (denom * (epsilon + rho_prev[b]));
  }
  return w;
}

/// Network power with the on/off term 1{rho_b > rho_off}.
inline double total_power(const Scenario& sc, std::span<const double> rho, double rho_off) {
  double p = 0.0;
  for (std::size_t b = 0; b < sc.num_bs(); ++b) {
    const double P = sc.bss[b].op_power_max, q = sc.bss[b].fixed_fraction;
    p += (1.0 - q) * rho[b] * P + (rho[b] > rho_off ? q * P : 0.0);
  }
  return p;
}

/// Closed-form minimizer of the linearized problem over X at multipliers
/// mu (one per entry of `tps`).  With r~_kbi = w_b - r_kbi mu_k, picks
/// k(b,i) = argmin_k r~ and the pattern minimizing sum_b [r~_{k(b,i) b i}]_-,
/// lowest index on ties.
class ClosedFormOracle {
 public:
  ClosedFormOracle(const RateTensor& r, std::span<const double> w, std::span<const double> d, std::vector<std::size_t> tps)
      : r_(r), w_(w.begin(), w.end()), tps_(std::move(tps)) {
    for (std::size_t k : tps_) d_.push_back(d[k]);
    for (std::size_t i = 0; i < r.num_patterns(); ++i)
      for (std::size_t b = 0; b < r.num_bs(); ++b)
        if (r.serves(i, b)) served_.emplace_back(i, b);
  }

  cutplane::OracleResult operator()(std::span<const double> mu) const {
    const std::size_t I = r_.num_patterns();
    double best = lp::kInf;
    std::size_t best_i = 0, s = 0;
    for (std::size_t i = 0; i < I; ++i) {
      double total = 0.0;
      for (; s < served_.size() && served_[s].first == i; ++s) {
        const double v = column_min(i, served_[s].second, mu).second;
        if (v < 0.0) total += v;
      }
      if (total < best) {
        best = total;
        best_i = i;
      }
    }
    cutplane::OracleResult out;
    out.pattern = best_i;
    out.generator.pi.emplace_back(best_i, 1.0);
    out.cut.coef = d_;
    double dmu = 0.0;
    for (std::size_t t = 0; t < tps_.size(); ++t) dmu += d_[t] * mu[t];
    out.value = best + dmu;
    for (std::size_t b = 0; b < r_.num_bs(); ++b) {
      if (!r_.serves(best_i, b)) continue;
      const auto [t, v] = column_min(best_i, b, mu);
      if (!(v < 0.0)) continue;
      const std::size_t k = tps_[t];
      out.generator.alpha.push_back({k, b, best_i, 1.0});
      out.cut.constant += w_[b];
      out.cut.coef[t] -= r_(k, b, best_i);
    }
    return out;
  }

  /// Cut of an arbitrary point of X under the current weights.
  cutplane::Cut cut_of(const SparsePoint& p) const {
    cutplane::Cut c;
    c.coef = d_;
    std::vector<std::size_t> pos(r_.num_tp(), SIZE_MAX);
    for (std::size_t t = 0; t < tps_.size(); ++t) pos[tps_[t]] = t;
    for (const AlphaEntry& e : p.alpha) {
      c.constant += w_[e.b] * e.value;
      if (pos[e.k] != SIZE_MAX) c.coef[pos[e.k]] -= e.value * r_(e.k, e.b, e.i);
    }
    return c;
  }

 private:
  std::pair<std::size_t, double> column_min(std::size_t i, std::size_t b, std::span<const double> mu) const {
    const auto col = r_.column(i, b);
    const double wb = w_[b];
    std::size_t arg = 0;
    double v = lp::kInf;
    for (std::size_t t = 0; t < tps_.size(); ++t) {
      const double x = wb - col[tps_[t]] * mu[t];
      if (x < v) {
        v = x;
        arg = t;
      }
    }
    return {arg, v};
  }

  const RateTensor& r_;
  std::vector<double> w_;
  std::vector<std::size_t> tps_;
  std::vector<double> d_;
  std::vector<std::pair<std::size_t, std::size_t>> served_;
};

/// Inner problem over all test points: (alpha, pi) of the minimizer and
/// h(mu) = min + sum_k d_k mu_k.
inline cutplane::OracleResult closed_form_inner(std::span<const double> mu, std::span<const double> w, const RateTensor& r,
                                          std::span<const double> d) {
  std::vector<std::size_t> all(r.num_tp());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return ClosedFormOracle(r, w, d, std::move(all))(mu);
}

/// Generators carried between weighted-LP solves of the outer loop.  They
/// are points of X, so they remain valid cuts when the weights change.
struct WarmStart {
  SparsePoint start;
  bool has_start = false;
  std::vector<SparsePoint> generators;
};

struct WeightedResult {
  lp::Status status = lp::Status::infeasible;
  Allocation allocation;
  double objective = 0.0;
  std::vector<double> mu;  // per test point, zero for zero demand
  std::size_t iterations = 0;
  bool converged = true;
  bool box_active = false;
  bool strict_start = true;
  std::vector<cutplane::TraceRow> trace;
  bool optimal() const { return status == lp::Status::optimal; }
};

/// Multiplier box 1e3 * max_b w_b / min{r_kbi > 0} per active test point.
inline std::vector<double> multiplier_box(const RateTensor& r, std::span<const double> w,
                                          const std::vector<std::size_t>& tps) {
  const double wmax = *std::max_element(w.begin(), w.end());
  std::vector<double> box;
  for (std::size_t k : tps) {
    const double m = r.min_positive(k);
    box.push_back(std::isfinite(m) ? 1e3 * wmax / m : 1e3 * wmax);
  }
  return box;
}

/// min sum_b w_b rho_b over X subject to the demand rows.
inline WeightedResult solve_weighted_lp(const RateTensor& r, std::span<const double> w, std::span<const double> d,
                                        const SolverParams& params, WarmStart* warm = nullptr) {
  const std::size_t K = r.num_tp(), B = r.num_bs(), I = r.num_patterns();
  if (w.size() != B || d.size() != K) throw std::invalid_argument("solve_weighted_lp: size mismatch");
  for (double v : w)
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("solve_weighted_lp: weights must be positive");
  WeightedResult out;
  const std::vector<std::size_t> tps = active_test_points(d);
  if (tps.empty()) {
    detail::check_rates(r);
    out.status = lp::Status::optimal;
    out.allocation = Allocation(I, B);
    out.allocation.pi[0] = 1.0;
    out.mu.assign(K, 0.0);
    return out;
  }
  if (params.engine == Engine::direct) {
    DirectResult dr = solve_direct_weighted_lp(r, w, d);
    out.status = dr.status;
    out.iterations = dr.iterations;
    if (!dr.optimal()) return out;
    out.allocation = std::move(dr.allocation);
    out.objective = dr.objective;
    out.mu = std::move(dr.mu);
    return out;
  }

  SparsePoint start;
  if (warm && warm->has_start) {
    start = warm->start;
  } else {
    const BalanceResult bal = rate_balance(r, d, Engine::cutplane);
    if (!is_feasible(bal, d)) return out;
    const StrictStart ss = strict_start(bal, r, d, {}, params.shrink);
    out.strict_start = ss.strict;
    start = to_sparse_point(ss.allocation);
    if (warm) {
      warm->start = start;
      warm->has_start = true;
    }
  }
  ClosedFormOracle oracle(r, w, d, tps);
  std::vector<cutplane::OracleResult> initial;
  initial.push_back({0.0, oracle.cut_of(start), start, 0});
  if (warm)
    for (const SparsePoint& g : warm->generators) initial.push_back({0.0, oracle.cut_of(g), g, 0});
  cutplane::Params cp = params.cut;
  if (cp.max_iter == 0) cp.max_iter = 50 * tps.size();
  const cutplane::RunResult run = cutplane::run(oracle, std::move(initial), multiplier_box(r, w, tps), cp);
  out.allocation = cutplane::primal_recovery(run.pool, I, B);
  out.status = lp::Status::optimal;
  out.iterations = run.iterations;
  out.converged = run.converged;
  out.box_active = run.box_active;
  out.trace = run.trace;
  for (std::size_t b = 0; b < B; ++b) out.objective += w[b] * out.allocation.rho[b];
  out.mu.assign(K, 0.0);
  for (std::size_t t = 0; t < tps.size(); ++t) out.mu[tps[t]] = run.pool.mu[t];
  if (warm) {
    // Keep the support of the final master plus the most recent cuts.
    const std::size_t keep_recent = 10 * tps.size();
    std::vector<SparsePoint> next;
    const auto& gens = run.pool.generators;
    for (std::size_t j = 1; j < gens.size(); ++j) {
      const bool support = j < run.pool.kappa.size() && run.pool.kappa[j] > 0.0;
      if (support || j + keep_recent >= gens.size()) next.push_back(gens[j]);
    }
    warm->generators = std::move(next);
  }
  return out;
}

struct EnergyResult {
  bool feasible = false;
  Allocation allocation;
  std::vector<std::size_t> active_bs;
  double total_power = 0.0;
  std::vector<double> surrogate;        // f(rho^(t)), t = 0, 1, ...
  std::vector<double> weighted_cost;    // sum_b w_b^(t) rho_b^(t)
  std::vector<std::size_t> inner_iterations;
  std::size_t outer_iterations = 0;
  bool outer_converged = false;
  std::size_t repairs = 0;
  std::vector<double> achieved;         // per test point
  double R_sum = 0.0;
  std::vector<std::string> warnings;
  double wall_ms = 0.0;
};

inline nlohmann::json to_json(const EnergyResult& e, const PatternSet* patterns = nullptr) {
  nlohmann::json pis = nlohmann::json::array();
  for (std::size_t i = 0; i < e.allocation.pi.size(); ++i)
    if (e.allocation.pi[i] > 1e-12) {
      nlohmann::json p{{"pattern", i}, {"fraction", e.allocation.pi[i]}};
      if (patterns) p["activity"] = patterns->row_string(i);
      pis.push_back(p);
    }
  return {{"feasible", e.feasible},
          {"total_power_W", e.feasible ? nlohmann::json(e.total_power) : nlohmann::json(nullptr)},
          {"active_bs", e.active_bs},
          {"rho", e.allocation.rho},
          {"pi_support", pis},
          {"achieved_rate_bps", e.achieved},
          {"R_sum_bps", e.R_sum},
          {"surrogate_trace", e.surrogate},
          {"inner_iterations", e.inner_iterations},
          {"outer_iterations", e.outer_iterations},
          {"outer_converged", e.outer_converged},
          {"repairs", e.repairs},
          {"warnings", e.warnings},
          {"wall_ms", e.wall_ms}};
}

/// Reweighted-l1 outer loop, then on/off rounding with a repair solve.
inline EnergyResult minimize_energy(const Scenario& sc, const RateTensor& r, std::span<const double> d,
                                    const SolverParams& params) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t B = r.num_bs(), I = r.num_patterns();
  if (B != sc.num_bs() || r.num_tp() != sc.num_tp()) throw std::invalid_argument("minimize_energy: size mismatch");
  EnergyResult out;
  auto finish = [&]() {
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };

  const BalanceResult bal = rate_balance(r, d, params.engine);
  out.R_sum = bal.R_sum;
  if (!is_feasible(bal, d)) return finish();
  out.feasible = true;
  if (bal.trivial) {
    out.allocation = Allocation(I, B);
    out.allocation.pi[0] = 1.0;
    out.achieved.assign(r.num_tp(), 0.0);
    out.outer_converged = true;
    return finish();
  }
  const StrictStart ss = strict_start(bal, r, d, {}, params.shrink);
  if (!ss.strict) out.warnings.push_back("demand is met without strict slack; relying on the multiplier box");

  WarmStart warm;
  warm.start = to_sparse_point(ss.allocation);
  warm.has_start = true;
  Allocation current = ss.allocation;
  std::vector<double> w = mm_weights(current.rho, sc, params.epsilon);
  out.surrogate.push_back(surrogate_objective(current.rho, sc, params.epsilon));

  for (std::size_t t = 1; t <= params.max_outer; ++t) {
    w = mm_weights(current.rho, sc, params.epsilon);
    const WeightedResult res = solve_weighted_lp(r, w, d, params, &warm);
    if (!res.optimal()) throw lp::solver_error("weighted LP failed inside the outer loop");
    if (res.box_active) out.warnings.push_back("multiplier box active at outer iteration " + std::to_string(t));
    if (!res.converged) out.warnings.push_back("cutting plane hit its iteration cap at outer iteration " + std::to_string(t));
    out.inner_iterations.push_back(res.iterations);
    ++out.outer_iterations;
    double prev_cost = 0.0, new_cost = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      prev_cost += w[b] * current.rho[b];
      new_cost += w[b] * res.allocation.rho[b];
    }
    // The previous point is feasible for this LP, so a larger weighted
    // cost can only come from solver tolerance; keep the previous point.
    const bool accept = new_cost <= prev_cost;
    double change = 0.0;
    if (accept) {
      for (std::size_t b = 0; b < B; ++b) change = std::max(change, std::abs(res.allocation.rho[b] - current.rho[b]));
      current = res.allocation;
    }
    out.weighted_cost.push_back(accept ? new_cost : prev_cost);
    out.surrogate.push_back(surrogate_objective(current.rho, sc, params.epsilon));
    if (change <= params.outer_tol) {
      out.outer_converged = true;
      break;
    }
  }

  // Rounding: BSs with rho <= rho_off are switched off.  If any of them
  // still carries load, re-solve with their rates removed; if that is
  // infeasible, restore the most loaded one and try again.
  std::vector<bool> off(B, false), restored(B, false);
  for (std::size_t b = 0; b < B; ++b) off[b] = current.rho[b] <= params.rho_off;
  for (std::size_t attempt = 0; attempt < 2 * B + 2; ++attempt) {
    bool needs_repair = false;
    for (std::size_t b = 0; b < B; ++b) needs_repair = needs_repair || (off[b] && current.rho[b] > 0.0);
    if (!needs_repair) break;
    const RateTensor reduced = r.with_bs_disabled(off);
    const BalanceResult rb = rate_balance(reduced, d, params.engine);
    WeightedResult res;
    if (is_feasible(rb, d)) {
      WarmStart fresh;
      res = solve_weighted_lp(reduced, mm_weights(current.rho, sc, params.epsilon), d, params, &fresh);
    }
    if (res.optimal()) {
      current = res.allocation;
      ++out.repairs;
      for (std::size_t b = 0; b < B; ++b) off[b] = off[b] || (!restored[b] && current.rho[b] <= params.rho_off);
      continue;
    }
    std::size_t best = B;
    for (std::size_t b = 0; b < B; ++b)
      if (off[b] && current.rho[b] > 0.0 && (best == B || current.rho[b] > current.rho[best])) best = b;
    off[best] = false;
    restored[best] = true;
    out.warnings.push_back("rounding restored BS " + std::to_string(best));
  }

  out.allocation = current;
  // A restored BS stays on even if its load is below rho_off.
  for (std::size_t b = 0; b < B; ++b) {
    const bool on = current.rho[b] > params.rho_off || (restored[b] && current.rho[b] > 0.0);
    if (on) out.active_bs.push_back(b);
  }
  out.total_power = total_power(sc, current.rho, params.rho_off);
  for (std::size_t b : out.active_bs)
    if (current.rho[b] <= params.rho_off) out.total_power += sc.bss[b].fixed_fraction * sc.bss[b].op_power_max;
  out.achieved = achieved_rates(current, r);
  return finish();
}

}  // namespace hetnet
