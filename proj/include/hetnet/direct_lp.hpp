// Direct formulation of the weighted LP over all (alpha, pi), used as the
// reference oracle for the cutting-plane path.
#pragma once

#include "hetnet/allocation.hpp"
#include "hetnet/lp.hpp"
#include "hetnet/rates.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace hetnet {

namespace detail {

/// Columns of X placed into an LP: pi_i and alpha_kbi for r_kbi > 0.
struct XModel {
  std::vector<std::size_t> pi_col;
  std::vector<AlphaEntry> alpha_key;  // value unused
  std::size_t alpha_col0 = 0;
  std::size_t convexity_row = 0;
};

/// Adds the constraints of X to `lp`.  Row `rate_row0 + k` receives
/// alpha_kbi * r_kbi for every test point; those rows must already exist.
/// alpha_kbi costs w[b] (zero when w is empty).
inline XModel add_x_constraints(const RateTensor& r, lp::LinearProgram& lp, std::size_t rate_row0,
                                std::span<const double> w) {
  const std::size_t K = r.num_tp(), B = r.num_bs(), I = r.num_patterns();
  XModel m;
  m.convexity_row = lp.add_row(lp::RowSense::equal, 1.0);
  for (std::size_t i = 0; i < I; ++i) m.pi_col.push_back(lp.add_variable(0.0, 0.0, lp::kInf, {{m.convexity_row, 1.0}}));
  m.alpha_col0 = lp.num_cols();
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t b = 0; b < B; ++b) {
      if (!r.serves(i, b)) continue;
      const std::size_t cap = lp.add_row(lp::RowSense::less_equal, 0.0);
      lp.add_coefficient(cap, m.pi_col[i], -1.0);
      const auto col = r.column(i, b);
      for (std::size_t k = 0; k < K; ++k) {
        if (col[k] <= 0.0) continue;
        lp.add_variable(w.empty() ? 0.0 : w[b], 0.0, lp::kInf, {{rate_row0 + k, col[k]}, {cap, 1.0}});
        m.alpha_key.push_back({k, b, i, 0.0});
      }
    }
  return m;
}

inline Allocation extract_allocation(const XModel& m, const lp::LpSolution& sol, std::size_t B) {
  Allocation a(m.pi_col.size(), B);
  for (std::size_t i = 0; i < m.pi_col.size(); ++i) a.pi[i] = std::max(0.0, sol.primal[m.pi_col[i]]);
  for (std::size_t t = 0; t < m.alpha_key.size(); ++t) {
    const double v = sol.primal[m.alpha_col0 + t];
    if (v > 0.0) {
      AlphaEntry e = m.alpha_key[t];
      e.value = v;
      a.alpha.push_back(e);
    }
  }
  a.finalize();
  return a;
}

inline void check_rates(const RateTensor& r) {
  for (double v : r.raw())
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("rate tensor has a negative or non-finite entry");
}

}  // namespace detail

struct DirectResult {
  lp::Status status = lp::Status::infeasible;
  Allocation allocation;
  double objective = 0.0;
  std::vector<double> mu;  // demand-row multipliers
  std::size_t iterations = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool optimal() const { return status == lp::Status::optimal; }
};

/// min sum_b w_b sum_{k,i} alpha_kbi  s.t.  sum_{b,i} alpha_kbi r_kbi >= d_k,
/// (alpha, pi) in X.  Zero weights give a pure feasibility problem.
inline DirectResult solve_direct_weighted_lp(const RateTensor& r, std::span<const double> w, std::span<const double> d,
                                             const lp::SolveOptions& options = {}) {
  const std::size_t K = r.num_tp(), B = r.num_bs();
  if (d.size() != K || (!w.empty() && w.size() != B)) throw std::invalid_argument("solve_direct_weighted_lp: size mismatch");
  for (double v : d)
    if (!(v >= 0.0)) throw std::invalid_argument("solve_direct_weighted_lp: negative demand");
  detail::check_rates(r);
  lp::LinearProgram lp;
  for (std::size_t k = 0; k < K; ++k) lp.add_row(lp::RowSense::greater_equal, d[k]);
  const detail::XModel m = detail::add_x_constraints(r, lp, 0, w);
  const lp::LpSolution sol = lp::solve_lp(lp, options);
  DirectResult out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.rows = lp.num_rows();
  out.cols = lp.num_cols();
  if (!sol.optimal()) return out;
  out.allocation = detail::extract_allocation(m, sol, B);
  out.objective = sol.objective;
  out.mu.assign(sol.duals.begin(), sol.duals.begin() + static_cast<std::ptrdiff_t>(K));
  return out;
}

}  // namespace hetnet
