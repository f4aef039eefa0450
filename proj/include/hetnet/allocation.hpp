// Resource allocations (alpha, pi, rho) and sparse points of the set X.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace hetnet {

/// alpha_kbi: share of the band BS b gives test point k under pattern i.
struct AlphaEntry {
  std::size_t k = 0;
  std::size_t b = 0;
  std::size_t i = 0;
  double value = 0.0;
};

/// A point of X in sparse form.  Used for cutting-plane generators, which
/// touch a single pattern (closed-form inner vertices) or a few (initial points).
struct SparsePoint {
  std::vector<std::pair<std::size_t, double>> pi;  // (pattern, fraction)
  std::vector<AlphaEntry> alpha;
};

class Allocation {
 public:
  std::vector<AlphaEntry> alpha;  // sorted by (i, b, k), strictly positive values
  std::vector<double> pi;         // one per pattern
  std::vector<double> rho;        // one per BS

  Allocation() = default;
  Allocation(std::size_t num_patterns, std::size_t num_bs) : pi(num_patterns, 0.0), rho(num_bs, 0.0) {}

  std::size_t num_patterns() const { return pi.size(); }
  std::size_t num_bs() const { return rho.size(); }

  /// Sorts alpha, merges duplicate keys, drops entries <= drop_tol and
  /// recomputes rho.
  void finalize(double drop_tol = 0.0) {
    std::sort(alpha.begin(), alpha.end(), [](const AlphaEntry& a, const AlphaEntry& b) {
      return std::tie(a.i, a.b, a.k) < std::tie(b.i, b.b, b.k);
    });
    std::vector<AlphaEntry> merged;
    merged.reserve(alpha.size());
    for (const AlphaEntry& e : alpha) {
      if (!merged.empty() && merged.back().i == e.i && merged.back().b == e.b && merged.back().k == e.k)
        merged.back().value += e.value;
      else
        merged.push_back(e);
    }
    alpha.clear();
    for (const AlphaEntry& e : merged)
      if (e.value > drop_tol) alpha.push_back(e);
    std::fill(rho.begin(), rho.end(), 0.0);
    for (const AlphaEntry& e : alpha) rho[e.b] += e.value;
  }

  /// Adds weight * point.
  void accumulate(const SparsePoint& p, double weight) {
    for (const auto& [i, v] : p.pi) pi[i] += weight * v;
    for (AlphaEntry e : p.alpha) {
      e.value *= weight;
      alpha.push_back(e);
    }
  }

  /// Multiplies all alpha entries (not pi) by c.
  void scale_alpha(double c) {
    for (AlphaEntry& e : alpha) e.value *= c;
    for (double& r : rho) r *= c;
  }

  /// Sum_k alpha_kbi for every (b, i) with a nonzero entry.
  std::vector<std::tuple<std::size_t, std::size_t, double>> capacity_use() const {
    std::vector<std::tuple<std::size_t, std::size_t, double>> out;
    for (const AlphaEntry& e : alpha) {
      if (!out.empty() && std::get<0>(out.back()) == e.i && std::get<1>(out.back()) == e.b)
        std::get<2>(out.back()) += e.value;
      else
        out.emplace_back(e.i, e.b, e.value);
    }
    return out;
  }

  /// Largest violation of the constraints of X (0 when feasible).
  double max_violation() const {
    double v = 0.0, sum_pi = 0.0;
    for (double p : pi) {
      v = std::max(v, -p);
      sum_pi += p;
    }
    v = std::max(v, std::abs(sum_pi - 1.0));
    for (const AlphaEntry& e : alpha) v = std::max(v, -e.value);
    for (const auto& [i, b, use] : capacity_use()) v = std::max(v, use - pi[i]);
    return v;
  }

  std::size_t active_patterns(double tol) const {
    return static_cast<std::size_t>(std::count_if(pi.begin(), pi.end(), [tol](double p) { return p > tol; }));
  }
};

/// |{i : pi_i > tol}|.
inline std::size_t count_active_patterns(const Allocation& a, double tol = 1e-9) { return a.active_patterns(tol); }

inline nlohmann::json to_json(const Allocation& a, double tol = 1e-12) {
  nlohmann::json pis = nlohmann::json::array();
  for (std::size_t i = 0; i < a.pi.size(); ++i)
    if (a.pi[i] > tol) pis.push_back({{"pattern", i}, {"fraction", a.pi[i]}});
  nlohmann::json al = nlohmann::json::array();
  for (const AlphaEntry& e : a.alpha)
    if (e.value > tol) al.push_back({{"k", e.k}, {"b", e.b}, {"i", e.i}, {"value", e.value}});
  return {{"pi", pis}, {"alpha", al}, {"rho", a.rho}};
}

}  // namespace hetnet
