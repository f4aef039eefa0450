// Dense revised simplex for small and medium linear programs.
//
// Bounded-variable primal simplex with an explicit basis inverse, a
// two-phase start (artificials on infeasible rows), Harris ratio test,
// Dantzig pricing with a Bland fallback on long degenerate runs, and
// optional warm starts from a previously returned basis.  Every optimal
// solution carries its row duals so callers can recover primal
// information from master problems.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetnet::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Objective { minimize, maximize };
enum class RowSense { less_equal, greater_equal, equal };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

/// Raised when the simplex cannot continue (singular basis after
/// refactorization).
class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Entry {
  std::size_t row;
  double value;
};

/// min/max c'x  s.t.  rows (<=, >=, =),  lower <= x <= upper.
/// Stored column-wise; columns may reference only rows that already exist.
class LinearProgram {
 public:
  explicit LinearProgram(Objective sense = Objective::minimize) : sense_(sense) {}

  std::size_t add_row(RowSense sense, double rhs) {
    row_sense_.push_back(sense);
    rhs_.push_back(rhs);
    return rhs_.size() - 1;
  }

  std::size_t add_variable(double cost, double lower = 0.0, double upper = kInf) {
    cost_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    columns_.emplace_back();
    return cost_.size() - 1;
  }

  std::size_t add_variable(double cost, double lower, double upper,
                           std::span<const Entry> entries) {
    const std::size_t j = add_variable(cost, lower, upper);
    for (const Entry& e : entries) add_coefficient(e.row, j, e.value);
    return j;
  }

  std::size_t add_variable(double cost, double lower, double upper, std::initializer_list<Entry> entries) {
    return add_variable(cost, lower, upper, std::span<const Entry>(entries.begin(), entries.size()));
  }

  void add_coefficient(std::size_t row, std::size_t col, double value) {
    if (row >= rhs_.size() || col >= cost_.size())
      throw std::out_of_range("LinearProgram::add_coefficient: index out of range");
    if (value == 0.0) return;
    columns_[col].push_back({row, value});
  }

  void set_bounds(std::size_t col, double lower, double upper) {
    lower_.at(col) = lower;
    upper_.at(col) = upper;
  }

  Objective sense() const { return sense_; }
  std::size_t num_rows() const { return rhs_.size(); }
  std::size_t num_cols() const { return cost_.size(); }
  double cost(std::size_t j) const { return cost_[j]; }
  double lower(std::size_t j) const { return lower_[j]; }
  double upper(std::size_t j) const { return upper_[j]; }
  RowSense row_sense(std::size_t r) const { return row_sense_[r]; }
  double rhs(std::size_t r) const { return rhs_[r]; }
  std::span<const Entry> column(std::size_t j) const { return columns_[j]; }

  std::size_t num_nonzeros() const {
    std::size_t nnz = 0;
    for (const auto& c : columns_) nnz += c.size();
    return nnz;
  }

  void validate() const {
    for (std::size_t j = 0; j < cost_.size(); ++j) {
      if (!std::isfinite(cost_[j]))
        throw std::invalid_argument("LinearProgram: non-finite objective coefficient at column " +
                                    std::to_string(j));
      if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] > upper_[j] ||
          lower_[j] == kInf || upper_[j] == -kInf)
        throw std::invalid_argument("LinearProgram: invalid bounds at column " + std::to_string(j));
      for (const Entry& e : columns_[j])
        if (!std::isfinite(e.value))
          throw std::invalid_argument("LinearProgram: non-finite coefficient at column " +
                                      std::to_string(j));
    }
    for (std::size_t r = 0; r < rhs_.size(); ++r)
      if (!std::isfinite(rhs_[r]))
        throw std::invalid_argument("LinearProgram: non-finite rhs at row " + std::to_string(r));
  }

  /// CPLEX LP text format, for debugging.
  void write_lp(std::ostream& os) const {
    auto term = [&](double v, const std::string& name, bool first) {
      if (v >= 0 && !first) os << " + ";
      else if (v < 0) os << (first ? "- " : " - ");
      os << std::abs(v) << ' ' << name;
    };
    auto var = [](std::size_t j) { return "x" + std::to_string(j); };
    os << (sense_ == Objective::minimize ? "Minimize\n obj: " : "Maximize\n obj: ");
    bool first = true;
    for (std::size_t j = 0; j < cost_.size(); ++j)
      if (cost_[j] != 0.0) { term(cost_[j], var(j), first); first = false; }
    if (first) os << "0 x0";
    os << "\nSubject To\n";
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(rhs_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j)
      for (const Entry& e : columns_[j]) rows[e.row].emplace_back(j, e.value);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      os << " c" << r << ": ";
      first = true;
      for (auto [j, v] : rows[r]) { term(v, var(j), first); first = false; }
      if (first) os << "0 x0";
      os << (row_sense_[r] == RowSense::less_equal      ? " <= "
             : row_sense_[r] == RowSense::greater_equal ? " >= "
                                                        : " = ")
         << rhs_[r] << '\n';
    }
    os << "Bounds\n";
    for (std::size_t j = 0; j < cost_.size(); ++j) {
      if (lower_[j] == -kInf && upper_[j] == kInf) { os << ' ' << var(j) << " free\n"; continue; }
      os << ' ';
      if (lower_[j] == -kInf) os << "-inf"; else os << lower_[j];
      os << " <= " << var(j) << " <= ";
      if (upper_[j] == kInf) os << "+inf"; else os << upper_[j];
      os << '\n';
    }
    os << "End\n";
  }

 private:
  Objective sense_;
  std::vector<double> cost_, lower_, upper_;
  std::vector<std::vector<Entry>> columns_;
  std::vector<RowSense> row_sense_;
  std::vector<double> rhs_;
};

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, free_zero };

/// Basis snapshot: one status per structural column and per row slack.
/// A basis with fewer column entries than the program it is applied to
/// is padded with nonbasic columns, so a master problem that only gained
/// columns can be warm started from its previous optimum.
struct Basis {
  std::vector<VarStatus> columns;
  std::vector<VarStatus> rows;
  bool empty() const { return rows.empty(); }
};

struct LpSolution {
  Status status = Status::infeasible;
  std::vector<double> primal;         // structural values
  std::vector<double> duals;          // per row, d(objective)/d(rhs)
  std::vector<double> reduced_costs;  // c_j - a_j' duals
  std::vector<double> row_activity;   // A x
  double objective = 0.0;
  std::size_t iterations = 0;
  Basis basis;  // set on optimal solutions without leftover artificials
  std::string diagnostic;

  bool optimal() const { return status == Status::optimal; }
};

struct SolveOptions {
  std::size_t max_iterations = 0;  // 0: automatic, 50 * (rows + cols) + 1000
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-10;
  /// Objective normalization; 0 picks max |c_j|.
  double cost_scale = 0.0;
  const Basis* warm_start = nullptr;
};

namespace detail {

class RevisedSimplex {
 public:
  RevisedSimplex(const LinearProgram& lp, const SolveOptions& opt)
      : lp_(lp), opt_(opt), m_(lp.num_rows()), n_(lp.num_cols()) {
    lp_.validate();
    total_ = n_ + 2 * m_;

    // Row scaling: max |a_rj| = 1 on every row.
    row_scale_.assign(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      for (const Entry& e : lp_.column(j))
        row_scale_[e.row] = std::max(row_scale_[e.row], std::abs(e.value));
    for (double& s : row_scale_)
      if (s == 0.0) s = 1.0;

    cols_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      cols_[j].reserve(lp_.column(j).size());
      for (const Entry& e : lp_.column(j)) cols_[j].push_back({e.row, e.value / row_scale_[e.row]});
    }
    rhs_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) rhs_[r] = lp_.rhs(r) / row_scale_[r];

    cost_scale_ = opt_.cost_scale;
    if (cost_scale_ <= 0.0) {
      cost_scale_ = 0.0;
      for (std::size_t j = 0; j < n_; ++j) cost_scale_ = std::max(cost_scale_, std::abs(lp_.cost(j)));
      if (cost_scale_ == 0.0) cost_scale_ = 1.0;
    }
    const double sign = lp_.sense() == Objective::maximize ? -1.0 : 1.0;
    cost2_.assign(total_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost2_[j] = sign * lp_.cost(j) / cost_scale_;

    lo_.assign(total_, 0.0);
    up_.assign(total_, kInf);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower(j);
      up_[j] = lp_.upper(j);
    }
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t s = n_ + r;
      switch (lp_.row_sense(r)) {
        case RowSense::less_equal: lo_[s] = 0.0; up_[s] = kInf; break;
        case RowSense::greater_equal: lo_[s] = -kInf; up_[s] = 0.0; break;
        case RowSense::equal: lo_[s] = 0.0; up_[s] = 0.0; break;
      }
    }
    art_sign_.assign(m_, 1.0);
    x_.assign(total_, 0.0);
    status_.assign(total_, VarStatus::at_lower);
    head_.assign(m_, 0);
    max_iter_ = opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + n_) + 1000;
  }

  LpSolution run() {
    LpSolution sol;
    if (m_ == 0) return solve_without_rows();

    bool warm = opt_.warm_start && try_warm_start(*opt_.warm_start);
    if (!warm) {
      cold_start();
      if (any_artificial_basic()) {
        phase_cost_.assign(total_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) phase_cost_[n_ + m_ + r] = 1.0;
        const Status s1 = iterate();
        if (s1 == Status::iteration_limit) return finish(Status::iteration_limit, "phase 1 iteration limit");
        double infeas = 0.0;
        for (std::size_t r = 0; r < m_; ++r) infeas += x_[n_ + m_ + r];
        if (infeas > opt_.feasibility_tol * std::max(1.0, rhs_norm())) return finish(Status::infeasible, "");
      }
    }
    // Artificials are frozen at zero from here on.
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t a = n_ + m_ + r;
      up_[a] = 0.0;
      if (status_[a] != VarStatus::basic) { status_[a] = VarStatus::at_lower; x_[a] = 0.0; }
    }
    phase_cost_ = cost2_;
    const Status s2 = iterate();
    if (s2 != Status::optimal) return finish(s2, s2 == Status::unbounded ? "" : "phase 2 iteration limit");
    drive_out_artificials();
    return finish(Status::optimal, "");
  }

 private:
  // ---- column access ------------------------------------------------------
  template <class F>
  void for_column(std::size_t j, F&& f) const {
    if (j < n_) {
      for (const Entry& e : cols_[j]) f(e.row, e.value);
    } else if (j < n_ + m_) {
      f(j - n_, 1.0);
    } else {
      f(j - n_ - m_, art_sign_[j - n_ - m_]);
    }
  }

  double dot_y(std::size_t j) const {
    double s = 0.0;
    for_column(j, [&](std::size_t r, double v) { s += y_[r] * v; });
    return s;
  }

  double rhs_norm() const {
    double s = 0.0;
    for (double v : rhs_) s = std::max(s, std::abs(v));
    return s;
  }

  // ---- starts -------------------------------------------------------------
  void place_nonbasic(std::size_t j) {
    if (lo_[j] > -kInf) { status_[j] = VarStatus::at_lower; x_[j] = lo_[j]; }
    else if (up_[j] < kInf) { status_[j] = VarStatus::at_upper; x_[j] = up_[j]; }
    else { status_[j] = VarStatus::free_zero; x_[j] = 0.0; }
  }

  std::vector<double> nonbasic_residual() const {
    std::vector<double> res = rhs_;
    for (std::size_t j = 0; j < total_; ++j) {
      if (status_[j] == VarStatus::basic || x_[j] == 0.0) continue;
      const double xj = x_[j];
      for_column(j, [&](std::size_t r, double v) { res[r] -= v * xj; });
    }
    return res;
  }

  void cold_start() {
    for (std::size_t j = 0; j < n_; ++j) place_nonbasic(j);
    for (std::size_t r = 0; r < m_; ++r) {
      status_[n_ + r] = VarStatus::at_lower;
      x_[n_ + r] = 0.0;
      status_[n_ + m_ + r] = VarStatus::at_lower;
      x_[n_ + m_ + r] = 0.0;
    }
    const std::vector<double> res = nonbasic_residual();
    binv_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    const double tol = opt_.feasibility_tol;
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t s = n_ + r;
      const std::size_t a = n_ + m_ + r;
      if (res[r] >= lo_[s] - tol && res[r] <= up_[s] + tol) {
        head_[r] = s;
        status_[s] = VarStatus::basic;
        x_[s] = res[r];
      } else {
        const double v = std::clamp(res[r], lo_[s], up_[s]);
        status_[s] = (v == lo_[s]) ? VarStatus::at_lower : VarStatus::at_upper;
        x_[s] = v;
        art_sign_[r] = res[r] > v ? 1.0 : -1.0;
        head_[r] = a;
        status_[a] = VarStatus::basic;
        x_[a] = std::abs(res[r] - v);
        binv_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) = art_sign_[r];
      }
    }
  }

  bool try_warm_start(const Basis& basis) {
    if (basis.rows.size() != m_ || basis.columns.size() > n_) return false;
    std::vector<std::size_t> head;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      const VarStatus st = j < n_ ? (j < basis.columns.size() ? basis.columns[j] : VarStatus::at_lower)
                                  : basis.rows[j - n_];
      if (st == VarStatus::basic) {
        head.push_back(j);
        status_[j] = VarStatus::basic;
        continue;
      }
      if (st == VarStatus::at_upper && up_[j] < kInf) { status_[j] = st; x_[j] = up_[j]; }
      else if (st == VarStatus::at_lower && lo_[j] > -kInf) { status_[j] = st; x_[j] = lo_[j]; }
      else place_nonbasic(j);
    }
    if (head.size() != m_) return false;
    for (std::size_t r = 0; r < m_; ++r) { status_[n_ + m_ + r] = VarStatus::at_lower; x_[n_ + m_ + r] = 0.0; }
    head_ = head;
    if (!refactor(false)) return false;
    recompute_primal();
    const double tol = opt_.feasibility_tol;
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t j = head_[p];
      if (x_[j] < lo_[j] - tol || x_[j] > up_[j] + tol) return false;
    }
    return true;
  }

  bool any_artificial_basic() const {
    for (std::size_t p = 0; p < m_; ++p)
      if (head_[p] >= n_ + m_) return true;
    return false;
  }

  // ---- linear algebra -----------------------------------------------------
  bool refactor(bool throw_on_singular = true) {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t p = 0; p < m_; ++p)
      for_column(head_[p], [&](std::size_t r, double v) {
        basis(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p)) = v;
      });
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    const double smallest = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(smallest > 1e-13)) {
      if (throw_on_singular) throw solver_error("simplex: singular basis after refactorization");
      return false;
    }
    binv_ = lu.inverse();
    since_refactor_ = 0;
    return true;
  }

  void recompute_primal() {
    const std::vector<double> res = nonbasic_residual();
    Eigen::Map<const Eigen::VectorXd> rv(res.data(), static_cast<Eigen::Index>(m_));
    const Eigen::VectorXd xb = binv_ * rv;
    for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] = xb(static_cast<Eigen::Index>(p));
  }

  double primal_residual() const {
    std::vector<double> res = rhs_;
    for (std::size_t j = 0; j < total_; ++j) {
      if (x_[j] == 0.0) continue;
      const double xj = x_[j];
      for_column(j, [&](std::size_t r, double v) { res[r] -= v * xj; });
    }
    double worst = 0.0;
    for (double v : res) worst = std::max(worst, std::abs(v));
    return worst;
  }

  void recompute_duals() {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
    for (std::size_t p = 0; p < m_; ++p) cb(static_cast<Eigen::Index>(p)) = phase_cost_[head_[p]];
    const Eigen::VectorXd y = binv_.transpose() * cb;
    y_.assign(y.data(), y.data() + m_);
  }

  void refresh(bool force_refactor) {
    if (force_refactor) refactor();
    recompute_primal();
    if (!force_refactor && primal_residual() > 1e-9 * std::max(1.0, rhs_norm())) {
      refactor();
      recompute_primal();
    }
    recompute_duals();
  }

  // ---- pricing ------------------------------------------------------------
  bool eligible(std::size_t j, double d) const {
    const double tol = opt_.optimality_tol;
    switch (status_[j]) {
      case VarStatus::basic: return false;
      case VarStatus::at_lower: return lo_[j] < up_[j] && d < -tol;
      case VarStatus::at_upper: return lo_[j] < up_[j] && d > tol;
      case VarStatus::free_zero: return std::abs(d) > tol;
    }
    return false;
  }

  /// Returns entering index or total_ if none.
  std::size_t price(double& d_out) const {
    std::size_t best = total_;
    double best_val = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      if (status_[j] == VarStatus::basic) continue;
      if (lo_[j] == up_[j]) continue;
      const double d = phase_cost_[j] - dot_y(j);
      if (!eligible(j, d)) continue;
      if (bland_) { d_out = d; return j; }
      if (std::abs(d) > best_val) { best_val = std::abs(d); best = j; d_out = d; }
    }
    return best;
  }

  // ---- main loop ----------------------------------------------------------
  Status iterate() {
    refresh(false);
    bland_ = false;
    std::size_t stalled = 0;
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd alpha(m);
    Eigen::RowVectorXd pivot_row(m);
    for (;;) {
      if (iterations_ >= max_iter_) return Status::iteration_limit;
      if (since_refactor_ > 0 && since_refactor_ % 64 == 0) refresh(since_refactor_ >= refactor_every());

      double dq = 0.0;
      std::size_t q = price(dq);
      if (q == total_) {
        // Confirm optimality against freshly computed iterates.
        refresh(false);
        q = price(dq);
        if (q == total_) return Status::optimal;
      }

      alpha.setZero();
      for_column(q, [&](std::size_t r, double v) { alpha += v * binv_.col(static_cast<Eigen::Index>(r)); });
      const double dir = dq < 0.0 ? 1.0 : -1.0;

      // Harris two-pass ratio test on x_B(t) = x_B - dir * t * alpha.
      const double ftol = opt_.feasibility_tol;
      const double ptol = opt_.pivot_tol;
      double relaxed = kInf;
      for (std::size_t p = 0; p < m_; ++p) {
        const double a = alpha(static_cast<Eigen::Index>(p));
        if (std::abs(a) <= ptol) continue;
        const double delta = -dir * a;
        const std::size_t j = head_[p];
        if (delta < 0.0 && lo_[j] > -kInf)
          relaxed = std::min(relaxed, std::max(0.0, x_[j] - lo_[j] + ftol) / -delta);
        else if (delta > 0.0 && up_[j] < kInf)
          relaxed = std::min(relaxed, std::max(0.0, up_[j] - x_[j] + ftol) / delta);
      }
      std::size_t leave = m_;
      double step = kInf;
      double best_piv = 0.0;
      for (std::size_t p = 0; p < m_; ++p) {
        const double a = alpha(static_cast<Eigen::Index>(p));
        if (std::abs(a) <= ptol) continue;
        const double delta = -dir * a;
        const std::size_t j = head_[p];
        double ratio = kInf;
        if (delta < 0.0 && lo_[j] > -kInf) ratio = std::max(0.0, x_[j] - lo_[j]) / -delta;
        else if (delta > 0.0 && up_[j] < kInf) ratio = std::max(0.0, up_[j] - x_[j]) / delta;
        if (ratio == kInf || ratio > relaxed) continue;
        const bool better = bland_ ? (leave == m_ || ratio < step - 1e-14 ||
                                      (ratio <= step + 1e-14 && j < head_[leave]))
                                   : std::abs(a) > best_piv;
        if (better) {
          leave = p;
          step = ratio;
          best_piv = std::abs(a);
        }
      }
      const double flip = up_[q] - lo_[q];
      const bool bound_flip = flip < kInf && (leave == m_ || flip <= step);
      if (leave == m_ && !bound_flip) return Status::unbounded;
      if (bound_flip) step = flip;
      step = std::max(step, 0.0);

      ++iterations_;
      ++since_refactor_;
      if (step * std::abs(dq) <= 1e-14) {
        if (++stalled > 3 * m_) bland_ = true;
      } else {
        stalled = 0;
        bland_ = false;
      }

      // Update primal values.
      x_[q] += dir * step;
      for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] -= dir * step * alpha(static_cast<Eigen::Index>(p));

      if (bound_flip) {
        status_[q] = (status_[q] == VarStatus::at_upper) ? VarStatus::at_lower : VarStatus::at_upper;
        x_[q] = status_[q] == VarStatus::at_upper ? up_[q] : lo_[q];
        continue;
      }

      const std::size_t out = head_[leave];
      const double delta_out = -dir * alpha(static_cast<Eigen::Index>(leave));
      if (delta_out < 0.0) { status_[out] = VarStatus::at_lower; x_[out] = lo_[out]; }
      else { status_[out] = VarStatus::at_upper; x_[out] = up_[out]; }
      head_[leave] = q;
      status_[q] = VarStatus::basic;

      const auto pl = static_cast<Eigen::Index>(leave);
      const double ap = alpha(pl);
      pivot_row = binv_.row(pl);
      for (std::size_t r = 0; r < m_; ++r) y_[r] += dq / ap * pivot_row(static_cast<Eigen::Index>(r));
      pivot_row /= ap;
      alpha(pl) = 0.0;
      binv_.noalias() -= alpha * pivot_row;
      binv_.row(pl) = pivot_row;
    }
  }

  std::size_t refactor_every() const { return std::max<std::size_t>(256, m_); }

  void drive_out_artificials() {
    bool changed = false;
    for (std::size_t p = 0; p < m_; ++p) {
      if (head_[p] < n_ + m_) continue;
      const auto pr = static_cast<Eigen::Index>(p);
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (status_[j] == VarStatus::basic) continue;
        double a = 0.0;
        for_column(j, [&](std::size_t r, double v) { a += binv_(pr, static_cast<Eigen::Index>(r)) * v; });
        if (std::abs(a) < 1e-7) continue;
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
        for_column(j, [&](std::size_t r, double v) { alpha += v * binv_.col(static_cast<Eigen::Index>(r)); });
        const std::size_t out = head_[p];
        status_[out] = VarStatus::at_lower;
        x_[out] = 0.0;
        head_[p] = j;
        status_[j] = VarStatus::basic;
        Eigen::RowVectorXd row = binv_.row(pr) / alpha(pr);
        alpha(pr) = 0.0;
        binv_.noalias() -= alpha * row;
        binv_.row(pr) = row;
        changed = true;
        break;
      }
    }
    if (changed) refresh(true);
  }

  LpSolution solve_without_rows() {
    LpSolution sol;
    const double sign = lp_.sense() == Objective::maximize ? -1.0 : 1.0;
    sol.primal.assign(n_, 0.0);
    sol.reduced_costs.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double c = sign * lp_.cost(j);
      double v;
      if (c > 0) v = lp_.lower(j);
      else if (c < 0) v = lp_.upper(j);
      else v = lp_.lower(j) > -kInf ? lp_.lower(j) : (lp_.upper(j) < kInf ? lp_.upper(j) : 0.0);
      if (!std::isfinite(v)) { sol.status = Status::unbounded; return sol; }
      sol.primal[j] = v;
      sol.reduced_costs[j] = lp_.cost(j);
      sol.objective += lp_.cost(j) * v;
    }
    sol.status = Status::optimal;
    sol.basis.columns.assign(n_, VarStatus::at_lower);
    return sol;
  }

  LpSolution finish(Status status, std::string diag) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    sol.diagnostic = std::move(diag);
    sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.row_activity.assign(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      for (const Entry& e : lp_.column(j)) sol.row_activity[e.row] += e.value * sol.primal[j];
    for (std::size_t j = 0; j < n_; ++j) sol.objective += lp_.cost(j) * sol.primal[j];
    if (status != Status::optimal) return sol;

    const double sign = lp_.sense() == Objective::maximize ? -1.0 : 1.0;
    sol.duals.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) sol.duals[r] = sign * cost_scale_ * y_[r] / row_scale_[r];
    sol.reduced_costs.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double s = lp_.cost(j);
      for (const Entry& e : lp_.column(j)) s -= e.value * sol.duals[e.row];
      sol.reduced_costs[j] = s;
    }
    if (!any_artificial_basic()) {
      sol.basis.columns.assign(status_.begin(), status_.begin() + static_cast<std::ptrdiff_t>(n_));
      sol.basis.rows.assign(status_.begin() + static_cast<std::ptrdiff_t>(n_),
                            status_.begin() + static_cast<std::ptrdiff_t>(n_ + m_));
    }
    return sol;
  }

  const LinearProgram& lp_;
  SolveOptions opt_;
  std::size_t m_, n_, total_ = 0;
  std::vector<std::vector<Entry>> cols_;
  std::vector<double> rhs_, row_scale_, cost2_, phase_cost_, lo_, up_, art_sign_, x_, y_;
  std::vector<VarStatus> status_;
  std::vector<std::size_t> head_;
  Eigen::MatrixXd binv_;
  double cost_scale_ = 1.0;
  std::size_t max_iter_ = 0, iterations_ = 0, since_refactor_ = 0;
  bool bland_ = false;
};

}  // namespace detail

/// Solves `lp`.  Deterministic for identical input and options.
inline LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& options = {}) {
  detail::RevisedSimplex simplex(lp, options);
  return simplex.run();
}

}  // namespace hetnet::lp
