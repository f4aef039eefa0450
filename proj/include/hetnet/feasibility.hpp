// Rate balancing: max R_sum s.t. beta_k R_sum <= sum_{b,i} alpha_kbi r_kbi,
// (alpha, pi) in X, with beta = d / sum(d).  Decides feasibility of the
// demand vector and supplies a strictly feasible starting point.
#pragma once

#include "hetnet/cutting_plane.hpp"
#include "hetnet/direct_lp.hpp"

#include <json.hpp>

#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetnet {

enum class Engine { cutplane, direct };

inline std::string_view to_string(Engine e) { return e == Engine::cutplane ? "cutplane" : "direct"; }

inline Engine parse_engine(std::string_view s) {
  if (s == "cutplane") return Engine::cutplane;
  if (s == "direct") return Engine::direct;
  throw config_error("engine", "expected 'cutplane' or 'direct', got '" + std::string(s) + "'");
}

/// Test points with positive demand.
inline std::vector<std::size_t> active_test_points(std::span<const double> d) {
  std::vector<std::size_t> a;
  for (std::size_t k = 0; k < d.size(); ++k)
    if (d[k] > 0.0) a.push_back(k);
  return a;
}

/// sum_{b,i} alpha_kbi r_kbi for every k.
inline std::vector<double> achieved_rates(const Allocation& a, const RateTensor& r) {
  std::vector<double> R(r.num_tp(), 0.0);
  for (const AlphaEntry& e : a.alpha) R[e.k] += e.value * r(e.k, e.b, e.i);
  return R;
}

inline SparsePoint to_sparse_point(const Allocation& a) {
  SparsePoint p;
  for (std::size_t i = 0; i < a.pi.size(); ++i)
    if (a.pi[i] > 0.0) p.pi.emplace_back(i, a.pi[i]);
  p.alpha = a.alpha;
  return p;
}

struct BalanceResult {
  double R_sum = 0.0;
  Allocation allocation;
  std::vector<double> beta;
  std::vector<double> achieved;
  bool trivial = false;  // zero total demand
  std::size_t iterations = 0;
  std::vector<cutplane::TraceRow> trace;
};

inline nlohmann::json to_json(const BalanceResult& b) {
  return {{"R_sum", b.R_sum}, {"achieved_bps", b.achieved}, {"beta", b.beta}, {"trivial", b.trivial}};
}

/// Inner problem of the dualized rate balance: for multipliers lambda on
/// the active test points, pick per (b, i) the k maximizing lambda_k r_kbi
/// and the pattern maximizing the sum over b.  value = -max.
class BalanceOracle {
 public:
  BalanceOracle(const RateTensor& r, std::vector<std::size_t> active) : r_(r), active_(std::move(active)) {
    for (std::size_t i = 0; i < r.num_patterns(); ++i)
      for (std::size_t b = 0; b < r.num_bs(); ++b)
        if (r.serves(i, b)) served_.emplace_back(i, b);
  }

  cutplane::OracleResult operator()(std::span<const double> lambda) const {
    const std::size_t I = r_.num_patterns();
    double best = -1.0;
    std::size_t best_i = 0;
    std::size_t s = 0;
    for (std::size_t i = 0; i < I; ++i) {
      double total = 0.0;
      for (; s < served_.size() && served_[s].first == i; ++s) total += column_best(i, served_[s].second, lambda).second;
      if (total > best) {
        best = total;
        best_i = i;
      }
    }
    cutplane::OracleResult out;
    out.pattern = best_i;
    out.value = -best;
    out.cut.coef.assign(active_.size(), 0.0);
    out.generator.pi.emplace_back(best_i, 1.0);
    for (std::size_t b = 0; b < r_.num_bs(); ++b) {
      const auto [t, v] = column_best(best_i, b, lambda);
      if (v <= 0.0) continue;
      const std::size_t k = active_[t];
      out.cut.coef[t] -= r_(k, b, best_i);
      out.generator.alpha.push_back({k, b, best_i, 1.0});
    }
    return out;
  }

 private:
  /// (index into active, lambda_k r_kbi) of the best test point; lowest k on ties.
  std::pair<std::size_t, double> column_best(std::size_t i, std::size_t b, std::span<const double> lambda) const {
    const auto col = r_.column(i, b);
    std::size_t arg = 0;
    double v = -1.0;
    for (std::size_t t = 0; t < active_.size(); ++t) {
      const double x = lambda[t] * col[active_[t]];
      if (x > v) {
        v = x;
        arg = t;
      }
    }
    return {arg, v};
  }

  const RateTensor& r_;
  std::vector<std::size_t> active_;
  std::vector<std::pair<std::size_t, std::size_t>> served_;
};

inline double balance_upper_bound(const RateTensor& r) {
  double R = 0.0;
  for (std::size_t k = 0; k < r.num_tp(); ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < r.num_patterns(); ++i)
      for (std::size_t b = 0; b < r.num_bs(); ++b) m = std::max(m, r(k, b, i));
    R += m;
  }
  return R;
}

inline BalanceResult rate_balance(const RateTensor& r, std::span<const double> d, Engine engine,
                                  const cutplane::Params& params = {1e-9, 0}) {
  const std::size_t K = r.num_tp(), B = r.num_bs(), I = r.num_patterns();
  if (d.size() != K) throw std::invalid_argument("rate_balance: demand size mismatch");
  for (double v : d)
    if (!(v >= 0.0)) throw std::invalid_argument("rate_balance: negative demand");
  detail::check_rates(r);
  BalanceResult out;
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  out.beta.assign(K, 0.0);
  if (total <= 0.0) {
    out.trivial = true;
    out.allocation = Allocation(I, B);
    out.allocation.pi[0] = 1.0;
    out.achieved.assign(K, 0.0);
    return out;
  }
  for (std::size_t k = 0; k < K; ++k) out.beta[k] = d[k] / total;
  const std::vector<std::size_t> active = active_test_points(d);

  if (engine == Engine::direct) {
    lp::LinearProgram lp(lp::Objective::maximize);
    for (std::size_t k = 0; k < K; ++k) lp.add_row(lp::RowSense::greater_equal, 0.0);
    const std::size_t R = lp.add_variable(1.0, 0.0, balance_upper_bound(r));
    for (std::size_t k : active) lp.add_coefficient(k, R, -out.beta[k]);
    const detail::XModel m = detail::add_x_constraints(r, lp, 0, {});
    const lp::LpSolution sol = lp::solve_lp(lp);
    if (!sol.optimal()) throw lp::solver_error(std::string("rate balance LP: ") + lp::to_string(sol.status));
    out.allocation = detail::extract_allocation(m, sol, B);
    out.iterations = sol.iterations;
  } else {
    BalanceOracle oracle(r, active);
    std::vector<double> ones(active.size(), 1.0);
    std::vector<cutplane::OracleResult> initial{oracle(ones)};
    cutplane::SideConstraint side;
    for (std::size_t k : active) side.g.push_back(out.beta[k]);
    side.c = 1.0;
    cutplane::Params p = params;
    if (p.max_iter == 0) p.max_iter = std::max<std::size_t>(50 * active.size(), 200);
    const cutplane::RunResult run = cutplane::run(oracle, std::move(initial),
                                                  std::vector<double>(active.size(), lp::kInf), p, {side});
    out.allocation = cutplane::primal_recovery(run.pool, I, B);
    out.iterations = run.iterations;
    out.trace = run.trace;
  }
  out.achieved = achieved_rates(out.allocation, r);
  double R_sum = lp::kInf;
  for (std::size_t k : active) R_sum = std::min(R_sum, out.achieved[k] / out.beta[k]);
  out.R_sum = std::max(0.0, R_sum);
  return out;
}

/// Demand is feasible iff R_sum >= sum(d) (relative slack 1e-9 for
/// round-off).
inline bool is_feasible(const BalanceResult& balance, std::span<const double> d) {
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  if (total <= 0.0) return true;
  return balance.R_sum >= total * (1.0 - 1e-9);
}

struct StrictStart {
  Allocation allocation;
  bool strict = false;
  double margin = 0.0;  // min_k achieved_k / d_k - 1 before shrinking
  std::vector<double> achieved;
  cutplane::Cut cut;    // over active test points; empty coef when no weights given
};

/// Scales the balance allocation so each active demand is met with slack
/// shrink * margin * d_k.  With weights, also returns the cut
/// sum_b w_b rho_b + sum_k (d_k - achieved_k) mu_k over the active test
/// points.
inline StrictStart strict_start(const BalanceResult& balance, const RateTensor& r, std::span<const double> d,
                                std::span<const double> w = {}, double shrink = 0.5) {
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("strict_start: shrink must lie in (0, 1)");
  StrictStart out;
  out.allocation = balance.allocation;
  const std::vector<std::size_t> active = active_test_points(d);
  const std::vector<double> achieved = achieved_rates(balance.allocation, r);
  double gamma = lp::kInf;
  for (std::size_t k : active) gamma = std::min(gamma, achieved[k] / d[k]);
  if (active.empty()) gamma = lp::kInf;
  out.margin = gamma - 1.0;
  out.strict = gamma > 1.0 + 1e-9;
  if (out.strict && std::isfinite(gamma)) out.allocation.scale_alpha((1.0 + shrink * (gamma - 1.0)) / gamma);
  out.achieved = achieved_rates(out.allocation, r);
  if (!w.empty()) {
    for (std::size_t b = 0; b < r.num_bs(); ++b) out.cut.constant += w[b] * out.allocation.rho[b];
    for (std::size_t k : active) out.cut.coef.push_back(d[k] - out.achieved[k]);
  }
  return out;
}

}  // namespace hetnet
