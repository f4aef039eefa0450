// Kelley cutting-plane method for maximizing a concave polyhedral dual
// function h(mu) = min_j { c_j + g_j' mu }, given an oracle that returns
// the minimizing generator at any mu >= 0.
//
// The master  max z  s.t.  z <= c_j + g_j' mu (all cuts),  side rows,
// 0 <= mu <= box  is solved through its LP dual
//
//   min  sum_j kappa_j c_j - sum_s eta_s c_s + sum_k nu_k box_k
//   s.t. sum_j kappa_j = 1
//        sum_j kappa_j g_jk + sum_s eta_s s_sk - nu_k <= 0   for all k
//        kappa, eta, nu >= 0,
//
// which gains one column per cut and can be warm started from the
// previous basis.  mu and z are read off the row duals, and kappa is the
// convex weight vector used for primal recovery.
#pragma once

#include "hetnet/allocation.hpp"
#include "hetnet/lp.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hetnet::cutplane {

using lp::kInf;

/// cut(mu) = constant + coef' mu.
struct Cut {
  double constant = 0.0;
  std::vector<double> coef;

  double operator()(std::span<const double> mu) const {
    double v = constant;
    for (std::size_t k = 0; k < coef.size(); ++k) v += coef[k] * mu[k];
    return v;
  }
};

/// g' mu >= c.
struct SideConstraint {
  std::vector<double> g;
  double c = 0.0;
};

struct OracleResult {
  double value = 0.0;  // h(mu)
  Cut cut;
  SparsePoint generator;
  std::size_t pattern = 0;
};

template <class O>
concept Oracle = requires(O& o, std::span<const double> mu) {
  { o(mu) } -> std::same_as<OracleResult>;
};

struct MasterResult {
  std::vector<double> mu;
  double z = kInf;
  std::vector<double> kappa;  // one per cut
  std::vector<double> eta;    // one per side constraint
  std::vector<double> nu;     // one per multiplier (box duals)
  bool degenerate = false;    // empty pool: box corner, z unbounded
  std::size_t lp_iterations = 0;
};

/// Master problem over a growing cut list.  Successive solves reuse the
/// previous optimal basis.
class Master {
 public:
  Master(std::size_t num_mu, std::vector<double> box, std::vector<SideConstraint> side = {})
      : K_(num_mu), box_(std::move(box)), side_(std::move(side)) {
    if (box_.size() != K_) throw std::invalid_argument("Master: box size mismatch");
    for (const auto& s : side_)
      if (s.g.size() != K_) throw std::invalid_argument("Master: side constraint size mismatch");
  }

  void add_cut(Cut cut) {
    if (cut.coef.size() != K_) throw std::invalid_argument("Master: cut size mismatch");
    for (double v : cut.coef)
      if (!std::isfinite(v)) throw std::invalid_argument("Master: non-finite cut coefficient");
    if (!std::isfinite(cut.constant)) throw std::invalid_argument("Master: non-finite cut constant");
    cuts_.push_back(std::move(cut));
  }

  const std::vector<Cut>& cuts() const { return cuts_; }
  std::size_t num_mu() const { return K_; }
  const std::vector<double>& box() const { return box_; }

  MasterResult solve() {
    MasterResult out;
    if (cuts_.empty()) {
      for (double b : box_)
        if (!std::isfinite(b)) throw lp::solver_error("master problem unbounded: no cuts and no finite box");
      out.mu = box_;
      out.z = kInf;
      out.degenerate = true;
      return out;
    }
    lp::LinearProgram dual;
    const std::size_t conv = dual.add_row(lp::RowSense::equal, 1.0);
    for (std::size_t k = 0; k < K_; ++k) dual.add_row(lp::RowSense::less_equal, 0.0);
    std::vector<std::size_t> nu_col(K_, SIZE_MAX);
    for (std::size_t k = 0; k < K_; ++k)
      if (std::isfinite(box_[k])) nu_col[k] = dual.add_variable(box_[k], 0.0, kInf, {{1 + k, -1.0}});
    const std::size_t eta0 = dual.num_cols();
    for (const auto& s : side_) {
      const std::size_t j = dual.add_variable(-s.c);
      for (std::size_t k = 0; k < K_; ++k) dual.add_coefficient(1 + k, j, s.g[k]);
    }
    const std::size_t kappa0 = dual.num_cols();
    double cost_scale = 0.0;
    for (const auto& s : side_) cost_scale = std::max(cost_scale, std::abs(s.c));
    for (const Cut& c : cuts_) {
      const std::size_t j = dual.add_variable(c.constant, 0.0, kInf, {{conv, 1.0}});
      for (std::size_t k = 0; k < K_; ++k) dual.add_coefficient(1 + k, j, c.coef[k]);
      cost_scale = std::max(cost_scale, std::abs(c.constant));
    }
    lp::SolveOptions opt;
    opt.cost_scale = cost_scale > 0.0 ? cost_scale : 1.0;
    opt.warm_start = basis_.empty() ? nullptr : &basis_;
    lp::LpSolution sol = lp::solve_lp(dual, opt);
    if (!sol.optimal() && opt.warm_start) {
      opt.warm_start = nullptr;
      sol = lp::solve_lp(dual, opt);
    }
    if (sol.status == lp::Status::infeasible)
      throw lp::solver_error("master problem unbounded: add a bounding initial cut or a finite multiplier box");
    if (!sol.optimal()) throw lp::solver_error(std::string("master problem not solved: ") + lp::to_string(sol.status));
    basis_ = sol.basis;
    out.lp_iterations = sol.iterations;
    out.z = sol.duals[conv];
    out.mu.resize(K_);
    for (std::size_t k = 0; k < K_; ++k) out.mu[k] = std::max(0.0, -sol.duals[1 + k]);
    out.nu.assign(K_, 0.0);
    for (std::size_t k = 0; k < K_; ++k)
      if (nu_col[k] != SIZE_MAX) out.nu[k] = sol.primal[nu_col[k]];
    for (std::size_t s = 0; s < side_.size(); ++s) out.eta.push_back(sol.primal[eta0 + s]);
    out.kappa.assign(sol.primal.begin() + static_cast<std::ptrdiff_t>(kappa0), sol.primal.end());
    for (double& v : out.kappa) v = std::max(0.0, v);
    return out;
  }

 private:
  std::size_t K_;
  std::vector<double> box_;
  std::vector<SideConstraint> side_;
  std::vector<Cut> cuts_;
  lp::Basis basis_;
};

/// One-shot master solve.
inline MasterResult master_solve(const std::vector<Cut>& cuts, std::vector<double> box,
                                 std::vector<SideConstraint> side = {}) {
  const std::size_t K = box.size();
  Master m(K, std::move(box), std::move(side));
  for (const Cut& c : cuts) m.add_cut(c);
  return m.solve();
}

struct Params {
  double tol_gap = 1e-6;
  std::size_t max_iter = 0;  // 0: 50 * K
};

struct TraceRow {
  std::size_t l = 0;
  double z = 0.0;
  double h = 0.0;
  double gap = 0.0;
  std::size_t pattern = 0;
};

inline void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os) {
  os << "l,z,h,gap,pattern\n";
  os.precision(17);
  for (const TraceRow& t : trace) os << t.l << ',' << t.z << ',' << t.h << ',' << t.gap << ',' << t.pattern << '\n';
}

struct CutPool {
  std::vector<Cut> cuts;
  std::vector<SparsePoint> generators;
  std::vector<double> mu;
  double z = kInf;
  std::vector<double> kappa;
};

struct RunResult {
  CutPool pool;
  double h = -kInf;          // h(mu) at the returned mu
  bool converged = false;
  std::size_t iterations = 0;  // master solves
  std::size_t lp_iterations = 0;
  std::vector<TraceRow> trace;
  std::vector<double> nu;      // box duals of the final master
  std::vector<double> eta;     // side-constraint duals of the final master
  bool box_active = false;
};

/// Alternates master and oracle until z - h <= tol_gap * (1 + |h|) or the
/// iteration cap.  `initial` seeds the pool; each iteration appends the
/// oracle's cut at the current mu.  pool.kappa refers to the master that
/// produced pool.mu, i.e. to all cuts except the last appended one when
/// the loop stops on the cap.
template <Oracle O>
RunResult run(O& oracle, std::vector<OracleResult> initial, std::vector<double> box, const Params& params,
              std::vector<SideConstraint> side = {}) {
  const std::size_t K = box.size();
  const std::size_t max_iter = params.max_iter ? params.max_iter : std::max<std::size_t>(50 * K, 50);
  Master master(K, box, std::move(side));
  RunResult out;
  for (OracleResult& r : initial) {
    master.add_cut(r.cut);
    out.pool.cuts.push_back(std::move(r.cut));
    out.pool.generators.push_back(std::move(r.generator));
  }
  for (std::size_t l = 0; l < max_iter; ++l) {
    const MasterResult m = master.solve();
    ++out.iterations;
    out.lp_iterations += m.lp_iterations;
    OracleResult r = oracle(std::span<const double>(m.mu));
    const double gap = m.z - r.value;
    out.trace.push_back({l, m.z, r.value, gap, r.pattern});
    out.pool.mu = m.mu;
    out.pool.z = m.z;
    out.pool.kappa = m.kappa;
    out.pool.kappa.resize(out.pool.cuts.size(), 0.0);
    out.h = r.value;
    out.nu = m.nu;
    out.eta = m.eta;
    if (!m.degenerate && gap <= params.tol_gap * (1.0 + std::abs(r.value))) {
      out.converged = true;
      break;
    }
    master.add_cut(r.cut);
    out.pool.cuts.push_back(std::move(r.cut));
    out.pool.generators.push_back(std::move(r.generator));
  }
  for (std::size_t k = 0; k < K; ++k)
    if (std::isfinite(box[k]) && out.pool.mu.size() == K && out.pool.mu[k] >= box[k] * (1.0 - 1e-9)) out.box_active = true;
  return out;
}

/// Convex combination sum_j kappa_j * generator_j.
inline Allocation primal_recovery(const CutPool& pool, std::size_t num_patterns, std::size_t num_bs) {
  double sum = 0.0;
  for (double v : pool.kappa) sum += v;
  if (std::abs(sum - 1.0) > 1e-8)
    throw lp::solver_error("primal recovery: master weights sum to " + std::to_string(sum) + ", expected 1");
  Allocation a(num_patterns, num_bs);
  for (std::size_t j = 0; j < pool.kappa.size() && j < pool.generators.size(); ++j)
    if (pool.kappa[j] > 0.0) a.accumulate(pool.generators[j], pool.kappa[j]);
  a.finalize();
  return a;
}

}  // namespace hetnet::cutplane
