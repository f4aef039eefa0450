// Ergodic-rate tensor r_kbi for every (test point, BS, pattern).
//
// Fading: |h|^2 ~ Exp(1) per link (b, k) and frequency sample n.  The n-th
// draw of a link is the same for every pattern (common random numbers),
// and each link has its own stream seeded from (seed, k, b), so the
// tensor does not depend on evaluation order or thread count.
#pragma once

#include "hetnet/patterns.hpp"
#include "hetnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace hetnet {

enum class FadingMode : std::uint64_t { deterministic = 0, monte_carlo = 1 };

struct RateConfig {
  FadingMode mode = FadingMode::deterministic;
  std::size_t samples = 1000;  // monte_carlo only
  std::uint64_t seed = 0;      // monte_carlo only
  unsigned threads = 0;        // 0: hardware concurrency
};

class RateTensor {
 public:
  RateTensor() = default;
  RateTensor(std::size_t K, std::size_t B, std::size_t I) : K_(K), B_(B), I_(I), data_(K * B * I, 0.0) {}

  std::size_t num_tp() const { return K_; }
  std::size_t num_bs() const { return B_; }
  std::size_t num_patterns() const { return I_; }

  double operator()(std::size_t k, std::size_t b, std::size_t i) const { return data_[index(k, b, i)]; }
  double& at(std::size_t k, std::size_t b, std::size_t i) { return data_[index(k, b, i)]; }

  /// The K rates of link column (b, i), contiguous.
  std::span<const double> column(std::size_t i, std::size_t b) const {
    return {data_.data() + (i * B_ + b) * K_, K_};
  }
  std::span<double> column(std::size_t i, std::size_t b) { return {data_.data() + (i * B_ + b) * K_, K_}; }

  bool serves(std::size_t i, std::size_t b) const {
    for (double r : column(i, b))
      if (r > 0.0) return true;
    return false;
  }

  double max_rate() const {
    double m = 0.0;
    for (double r : data_) m = std::max(m, r);
    return m;
  }

  /// Smallest positive rate of test point k (infinity if none).
  double min_positive(std::size_t k) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < I_; ++i)
      for (std::size_t b = 0; b < B_; ++b) {
        const double r = (*this)(k, b, i);
        if (r > 0.0) m = std::min(m, r);
      }
    return m;
  }

  /// Copy with every rate of the flagged BSs set to zero.  Their
  /// interference on others is unchanged.
  RateTensor with_bs_disabled(const std::vector<bool>& off) const {
    RateTensor out = *this;
    for (std::size_t i = 0; i < I_; ++i)
      for (std::size_t b = 0; b < B_; ++b)
        if (off[b])
          for (double& r : out.column(i, b)) r = 0.0;
    return out;
  }

  /// Copy with all rates multiplied by c.
  RateTensor scaled(double c) const {
    RateTensor out = *this;
    for (double& r : out.data_) r *= c;
    return out;
  }

  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

  RateConfig config;
  std::uint64_t scenario_hash = 0;
  std::uint64_t pattern_hash = 0;

 private:
  std::size_t index(std::size_t k, std::size_t b, std::size_t i) const { return (i * B_ + b) * K_ + k; }

  std::size_t K_ = 0, B_ = 0, I_ = 0;
  std::vector<double> data_;
};

/// SINR of link (b -> k) under pattern i with per-BS fading powers
/// `fading[l]` = |h_lk|^2.
inline double sinr(const Scenario& sc, const PatternSet& A, std::size_t k, std::size_t b, std::size_t i,
                   std::span<const double> fading) {
  if (!A.active(i, b)) return 0.0;
  double interference = 0.0;
  for (std::size_t l = 0; l < sc.num_bs(); ++l)
    if (l != b && A.active(i, l)) interference += sc.bss[l].tx_psd * sc.channel_gain(l, k) * fading[l];
  return sc.bss[b].tx_psd * sc.channel_gain(b, k) * fading[b] / (sc.noise_psd + interference);
}

namespace detail {

inline constexpr double kLn2 = 0.69314718055994530942;

inline std::uint64_t link_seed(std::uint64_t seed, std::size_t k, std::size_t b, std::size_t num_bs) {
  return mix_seed(seed, 0x72617465ULL + k * num_bs + b);
}

/// |h_bk|^2 draws for all BSs at test point k: B x N, row-major.
inline std::vector<double> fading_draws(const Scenario& sc, std::size_t k, const RateConfig& cfg) {
  const std::size_t B = sc.num_bs();
  if (cfg.mode == FadingMode::deterministic) return std::vector<double>(B, 1.0);
  if (cfg.samples == 0) throw std::invalid_argument("monte carlo rates need at least one sample");
  std::vector<double> h(B * cfg.samples);
  for (std::size_t b = 0; b < B; ++b) {
    std::mt19937_64 rng(link_seed(cfg.seed, k, b, B));
    std::exponential_distribution<double> exp1(1.0);
    for (std::size_t n = 0; n < cfg.samples; ++n) h[b * cfg.samples + n] = exp1(rng);
  }
  return h;
}

/// Fills rates of test point k for all (b, i).  Interference at BS b is
/// the prefix sum over l < b plus the suffix sum over l > b, which keeps
/// full relative precision and is monotone in the set of active BSs.
inline void rates_for_tp(const Scenario& sc, const PatternSet& A, std::size_t k, const RateConfig& cfg,
                         RateTensor& out) {
  const std::size_t B = sc.num_bs();
  const std::size_t N = cfg.mode == FadingMode::deterministic ? 1 : cfg.samples;
  const std::vector<double> h = fading_draws(sc, k, cfg);
  std::vector<double> mean_power(B);
  for (std::size_t b = 0; b < B; ++b) mean_power[b] = sc.bss[b].tx_psd * sc.channel_gain(b, k);
  std::vector<double> p(B), prefix(B + 1), suffix(B + 1), acc(B);
  for (std::size_t i = 0; i < A.num_patterns(); ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t b = 0; b < B; ++b) p[b] = A.active(i, b) ? mean_power[b] * h[b * N + n] : 0.0;
      prefix[0] = 0.0;
      for (std::size_t b = 0; b < B; ++b) prefix[b + 1] = prefix[b] + p[b];
      suffix[B] = 0.0;
      for (std::size_t b = B; b-- > 0;) suffix[b] = suffix[b + 1] + p[b];
      for (std::size_t b = 0; b < B; ++b)
        if (p[b] > 0.0) acc[b] += std::log1p(p[b] / (sc.noise_psd + (prefix[b] + suffix[b + 1]))) / kLn2;
    }
    for (std::size_t b = 0; b < B; ++b) out.at(k, b, i) = sc.bandwidth * acc[b] / static_cast<double>(N);
  }
}

}  // namespace detail

/// W * E[log2(1 + SINR_kbi)] under the configured fading mode.
inline double ergodic_rate(const Scenario& sc, const PatternSet& A, std::size_t k, std::size_t b, std::size_t i,
                           const RateConfig& cfg) {
  if (!A.active(i, b)) return 0.0;
  const std::size_t B = sc.num_bs();
  const std::size_t N = cfg.mode == FadingMode::deterministic ? 1 : cfg.samples;
  const std::vector<double> h = detail::fading_draws(sc, k, cfg);
  std::vector<double> f(B);
  double acc = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t l = 0; l < B; ++l) f[l] = h[l * N + n];
    acc += std::log1p(sinr(sc, A, k, b, i, f)) / detail::kLn2;
  }
  return sc.bandwidth * acc / static_cast<double>(N);
}

inline RateTensor build_rate_tensor(const Scenario& sc, const PatternSet& A, const RateConfig& cfg = {}) {
  A.require_nonempty();
  if (A.num_bs() != sc.num_bs()) throw std::invalid_argument("build_rate_tensor: pattern width differs from B");
  const std::size_t K = sc.num_tp();
  RateTensor out(K, sc.num_bs(), A.num_patterns());
  out.config = cfg;
  out.scenario_hash = scenario_hash(sc);
  out.pattern_hash = A.hash();
  unsigned threads = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, K));
  if (threads <= 1) {
    for (std::size_t k = 0; k < K; ++k) detail::rates_for_tp(sc, A, k, cfg, out);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t k = t; k < K; k += threads) detail::rates_for_tp(sc, A, k, cfg, out);
    });
  for (auto& th : pool) th.join();
  return out;
}

// ---- cache ----------------------------------------------------------------

inline constexpr char kRateCacheMagic[8] = {'H', 'N', 'R', 'A', 'T', 'E', '0', '1'};

/// Header (magic, K, B, I, mode, samples, seed, scenario hash, pattern
/// hash as little-endian u64) followed by the K x B x I rates, row-major.
inline void write_rate_cache(const RateTensor& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write rate cache '" + path + "'");
  out.write(kRateCacheMagic, sizeof kRateCacheMagic);
  const std::uint64_t header[8] = {r.num_tp(), r.num_bs(), r.num_patterns(), static_cast<std::uint64_t>(r.config.mode),
                                   r.config.samples, r.config.seed, r.scenario_hash, r.pattern_hash};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  for (std::size_t k = 0; k < r.num_tp(); ++k)
    for (std::size_t b = 0; b < r.num_bs(); ++b)
      for (std::size_t i = 0; i < r.num_patterns(); ++i) {
        const double v = r(k, b, i);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
  if (!out) throw std::runtime_error("failed writing rate cache '" + path + "'");
}

/// Reads a cache file; nullopt if missing, malformed or truncated.
inline std::optional<RateTensor> read_rate_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint64_t header[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kRateCacheMagic, sizeof magic) != 0) return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(header), sizeof header)) return std::nullopt;
  const std::uint64_t K = header[0], B = header[1], I = header[2];
  if (K == 0 || B == 0 || I == 0 || K * B * I > (std::uint64_t{1} << 32) || header[3] > 1) return std::nullopt;
  RateTensor r(K, B, I);
  r.config.mode = static_cast<FadingMode>(header[3]);
  r.config.samples = header[4];
  r.config.seed = header[5];
  r.scenario_hash = header[6];
  r.pattern_hash = header[7];
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t i = 0; i < I; ++i)
        if (!in.read(reinterpret_cast<char*>(&r.at(k, b, i)), sizeof(double))) return std::nullopt;
  return r;
}

/// Uses the cache when its provenance matches, otherwise recomputes and
/// rewrites it.  `recomputed` reports which path was taken.
inline RateTensor load_or_build_rate_tensor(const std::string& path, const Scenario& sc, const PatternSet& A,
                                            const RateConfig& cfg, bool* recomputed = nullptr) {
  if (auto cached = read_rate_cache(path)) {
    const bool match = cached->scenario_hash == scenario_hash(sc) && cached->pattern_hash == A.hash() &&
                       cached->config.mode == cfg.mode && cached->num_tp() == sc.num_tp() &&
                       cached->num_bs() == sc.num_bs() && cached->num_patterns() == A.num_patterns() &&
                       (cfg.mode == FadingMode::deterministic ||
                        (cached->config.samples == cfg.samples && cached->config.seed == cfg.seed));
    if (match) {
      if (recomputed) *recomputed = false;
      cached->config.threads = cfg.threads;
      return *cached;
    }
  }
  RateTensor r = build_rate_tensor(sc, A, cfg);
  write_rate_cache(r, path);
  if (recomputed) *recomputed = true;
  return r;
}

inline void write_rate_csv(const RateTensor& r, std::ostream& os) {
  os << "k,b,i,rate\n";
  os.precision(17);
  for (std::size_t k = 0; k < r.num_tp(); ++k)
    for (std::size_t b = 0; b < r.num_bs(); ++b)
      for (std::size_t i = 0; i < r.num_patterns(); ++i) os << k << ',' << b << ',' << i << ',' << r(k, b, i) << '\n';
}

/// Checks nonnegativity and the zero-row property against A; returns the
/// number of violating entries.
inline std::size_t count_rate_violations(const RateTensor& r, const PatternSet& A) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < r.num_patterns(); ++i)
    for (std::size_t b = 0; b < r.num_bs(); ++b)
      for (double v : r.column(i, b))
        if (!(v >= 0.0) || (v > 0.0) != A.active(i, b)) ++bad;
  return bad;
}

/// Interference monotonicity: switching on one more BS never raises any
/// rate.  Compares every pattern with each single-BS extension present in
/// A; returns the number of (k, b) entries that increase.
inline std::size_t count_monotonicity_violations(const RateTensor& r, const PatternSet& A) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < A.num_patterns(); ++i) index.emplace(A.row_string(i), i);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < A.num_patterns(); ++i) {
    std::string row = A.row_string(i);
    for (std::size_t l = 0; l < A.num_bs(); ++l) {
      if (row[l] == '1') continue;
      row[l] = '1';
      const auto it = index.find(row);
      row[l] = '0';
      if (it == index.end()) continue;
      for (std::size_t b = 0; b < A.num_bs(); ++b) {
        if (!A.active(i, b)) continue;
        const auto lo = r.column(i, b), hi = r.column(it->second, b);
        for (std::size_t k = 0; k < r.num_tp(); ++k) bad += hi[k] > lo[k];
      }
    }
  }
  return bad;
}

}  // namespace hetnet
