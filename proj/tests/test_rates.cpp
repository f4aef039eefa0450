#include "hetnet/rates.hpp"

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>

using namespace hetnet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Scenario two_cells(double noise_psd) {
  return build_scenario(nlohmann::json{
      {"network",
       {{"noise_psd_w_per_hz", noise_psd},
        {"base_stations", {{{"kind", "macro"}, {"x", 0.0}, {"y", 0.0}}, {{"kind", "pico"}, {"x", 300.0}, {"y", 0.0}}}},
        {"test_points", {{{"x", 50.0}, {"y", 20.0}}, {{"x", 250.0}, {"y", -30.0}}, {{"x", 150.0}, {"y", 0.0}}}}}}});
}

/// One BS, one test point; noise chosen so that P G / sigma^2 = snr.
Scenario single_link(double snr) {
  const Scenario probe = two_cells(1e-20);
  const double pg = probe.bss[0].tx_psd * probe.channel_gain(0, 0);
  return build_scenario(nlohmann::json{
      {"network",
       {{"noise_psd_w_per_hz", pg / snr},
        {"base_stations", {{{"kind", "macro"}, {"x", 0.0}, {"y", 0.0}}}},
        {"test_points", {{{"x", 50.0}, {"y", 20.0}}}}}}});
}

Scenario fifteen_cells(std::uint64_t seed, std::size_t K) {
  return build_scenario(nlohmann::json{
      {"network", {{"macro_count", 3}, {"picos_per_macro", 4}, {"test_points", K}}}, {"seed", seed}});
}

/// Composite Simpson rule for int_0^upper g(x) e^{-x} dx.
template <class G>
double exp_weighted_integral(G g, double upper = 60.0, int n = 2000000) {
  const double h = upper / n;
  double s = g(0.0) + g(upper) * std::exp(-upper);
  for (int j = 1; j < n; ++j) {
    const double x = j * h;
    s += (j % 2 ? 4.0 : 2.0) * g(x) * std::exp(-x);
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("inactive BS has zero SINR", "[rates]") {
  const Scenario sc = two_cells(1e-20);
  const PatternSet A = enumerate_all(2);
  const std::vector<double> ones(2, 1.0);
  for (std::size_t i = 0; i < A.num_patterns(); ++i)
    for (std::size_t b = 0; b < 2; ++b)
      if (!A.active(i, b)) CHECK(sinr(sc, A, 0, b, i, ones) == 0.0);
}

TEST_CASE("lone BS SINR is P G over noise", "[rates]") {
  const Scenario sc = two_cells(1e-20);
  const PatternSet A = enumerate_all(2);  // row 1 = BS 0 only
  const std::vector<double> ones(2, 1.0);
  CHECK_THAT(sinr(sc, A, 1, 0, 1, ones), WithinRel(sc.bss[0].tx_psd * sc.channel_gain(0, 1) / 1e-20, 1e-14));
}

TEST_CASE("two equal received powers give unit SINR", "[rates]") {
  auto cfg = nlohmann::json{
      {"network",
       {{"noise_psd_w_per_hz", 1e-40},
        {"base_stations", {{{"kind", "macro"}, {"x", -100.0}, {"y", 0.0}}, {{"kind", "macro"}, {"x", 100.0}, {"y", 0.0}}}},
        {"test_points", {{{"x", 0.0}, {"y", 50.0}}}}}}};
  const Scenario sc = build_scenario(cfg);
  const PatternSet A = reuse1(2);
  const std::vector<double> ones(2, 1.0);
  CHECK_THAT(sinr(sc, A, 0, 0, 0, ones), WithinRel(1.0, 1e-9));
  CHECK_THAT(sinr(sc, A, 0, 1, 0, ones), WithinRel(1.0, 1e-9));
}

TEST_CASE("deterministic rate has the closed form", "[rates]") {
  const Scenario sc = single_link(3.0);
  const PatternSet A = reuse1(1);
  CHECK_THAT(ergodic_rate(sc, A, 0, 0, 0, {}), WithinRel(2e7, 1e-12));
  CHECK_THAT(build_rate_tensor(sc, A)(0, 0, 0), WithinRel(2e7, 1e-12));
  CHECK(ergodic_rate(sc, enumerate_all(1), 0, 0, 0, {}) == 0.0);
}

TEST_CASE("Monte Carlo rate matches the quadrature reference", "[rates][slow]") {
  const Scenario sc = single_link(3.0);
  const double mean = exp_weighted_integral([](double x) { return std::log2(1.0 + 3.0 * x); });
  const double second = exp_weighted_integral([](double x) { return std::pow(std::log2(1.0 + 3.0 * x), 2); });
  const double se = std::sqrt((second - mean * mean) / 1e5);
  RateConfig cfg;
  cfg.mode = FadingMode::monte_carlo;
  cfg.samples = 100000;
  cfg.seed = 11;
  const double r = build_rate_tensor(sc, reuse1(1), cfg)(0, 0, 0) / 1e7;
  INFO("reference " << mean << " standard error " << se << " estimate " << r);
  CHECK(std::abs(r - mean) <= 3.0 * se);
  CHECK_THAT(ergodic_rate(sc, reuse1(1), 0, 0, 0, cfg) / 1e7, WithinRel(r, 1e-12));
}

TEST_CASE("tensor entries match per-entry evaluation", "[rates]") {
  const Scenario sc = two_cells(4e-21);
  const PatternSet A = enumerate_all(2);
  const RateTensor r = build_rate_tensor(sc, A);
  REQUIRE(r.num_patterns() == 4);
  for (std::size_t k = 0; k < 3; ++k) {
    const double s0 = sc.bss[0].tx_psd * sc.channel_gain(0, k);
    const double s1 = sc.bss[1].tx_psd * sc.channel_gain(1, k);
    const double n = sc.noise_psd;
    // rows: 00, 10, 01, 11 (bit b of the row index is BS b)
    CHECK(r(k, 0, 0) == 0.0);
    CHECK(r(k, 1, 0) == 0.0);
    CHECK_THAT(r(k, 0, 1), WithinRel(1e7 * std::log1p(s0 / n) / std::log(2.0), 1e-12));
    CHECK(r(k, 1, 1) == 0.0);
    CHECK(r(k, 0, 2) == 0.0);
    CHECK_THAT(r(k, 1, 2), WithinRel(1e7 * std::log1p(s1 / n) / std::log(2.0), 1e-12));
    CHECK_THAT(r(k, 0, 3), WithinRel(1e7 * std::log1p(s0 / (n + s1)) / std::log(2.0), 1e-12));
    CHECK_THAT(r(k, 1, 3), WithinRel(1e7 * std::log1p(s1 / (n + s0)) / std::log(2.0), 1e-12));
  }
}

TEST_CASE("tensor shape follows the pattern set", "[rates]") {
  const Scenario sc = fifteen_cells(2, 8);
  const RateTensor r = build_rate_tensor(sc, reuse1(15));
  CHECK(r.num_patterns() == 1);
  CHECK(r.num_tp() == 8);
  const RateTensor all_off = build_rate_tensor(sc, PatternSet(15, {std::vector<std::uint8_t>(15, 0)}, "off"));
  for (double v : all_off.raw()) CHECK(v == 0.0);
}

TEST_CASE("interference monotonicity and zero rows hold", "[rates]") {
  const Scenario sc = fifteen_cells(4, 6);
  const Scenario small = two_cells(4e-21);
  for (FadingMode mode : {FadingMode::deterministic, FadingMode::monte_carlo}) {
    RateConfig cfg;
    cfg.mode = mode;
    cfg.samples = 50;
    const PatternSet A = preselect(sc, parse_strategies("leave_one_out,single_bs,macros_only,random:100:3"));
    const RateTensor r = build_rate_tensor(sc, A, cfg);
    CHECK(count_rate_violations(r, A) == 0);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < A.num_patterns(); ++i)
      for (std::size_t j = 0; j < A.num_patterns(); ++j) {
        bool subset = true;
        for (std::size_t b = 0; b < 15 && subset; ++b) subset = !A.active(j, b) || A.active(i, b);
        if (!subset || i == j) continue;
        for (std::size_t b = 0; b < 15; ++b) {
          if (!A.active(j, b)) continue;
          for (std::size_t k = 0; k < 6; ++k) CHECK(r(k, b, j) >= r(k, b, i));
          ++checked;
        }
      }
    CHECK(checked > 100);
    const RateTensor s = build_rate_tensor(small, enumerate_all(2), cfg);
    CHECK(count_rate_violations(s, enumerate_all(2)) == 0);
  }
}

TEST_CASE("tensor is independent of the thread count", "[rates]") {
  const Scenario sc = fifteen_cells(5, 7);
  const PatternSet A = preselect(sc, parse_strategies("random:20:1"));
  RateConfig one, many;
  one.mode = many.mode = FadingMode::monte_carlo;
  one.samples = many.samples = 30;
  one.threads = 1;
  many.threads = 3;
  CHECK(build_rate_tensor(sc, A, one).raw() == build_rate_tensor(sc, A, many).raw());
}

TEST_CASE("rate cache round-trips and detects stale provenance", "[rates]") {
  const Scenario sc = fifteen_cells(6, 5);
  const PatternSet A = preselect(sc, parse_strategies("leave_one_out"));
  const std::string path = (std::filesystem::temp_directory_path() / "hetnet_rate_cache_test.bin").string();
  std::filesystem::remove(path);
  bool recomputed = false;
  const RateTensor first = load_or_build_rate_tensor(path, sc, A, {}, &recomputed);
  CHECK(recomputed);
  const RateTensor second = load_or_build_rate_tensor(path, sc, A, {}, &recomputed);
  CHECK_FALSE(recomputed);
  CHECK(first.raw() == second.raw());
  const PatternSet other = preselect(sc, parse_strategies("single_bs"));
  const RateTensor third = load_or_build_rate_tensor(path, sc, other, {}, &recomputed);
  CHECK(recomputed);
  CHECK(third.num_patterns() == other.num_patterns());
  std::filesystem::remove(path);

  std::ostringstream csv;
  write_rate_csv(build_rate_tensor(sc, reuse1(15)), csv);
  CHECK(csv.str().rfind("k,b,i,rate\n", 0) == 0);
}
