#include "hetnet/hetnet.hpp"
#include "instances.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace hetnet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testing_instances::m1;

namespace {

/// One BS of the given kind at the origin and `tps` test points, with a
/// flat operational power so P^OP is exactly `p_op`.
Scenario power_scenario(const char* kind, double p_op, double q, std::size_t tps = 1) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t k = 0; k < tps; ++k) points.push_back({{"x", 50.0 + 10.0 * static_cast<double>(k)}, {"y", 0.0}});
  return build_scenario(nlohmann::json{
      {"network", {{"base_stations", {{{"kind", kind}, {"x", 0.0}, {"y", 0.0}}}}, {"test_points", points}}},
      {"power", {{kind, {{"op_slope", 0.0}, {"op_intercept_w", p_op}, {"fixed_fraction", q}}}}}});
}

Scenario small_drop(std::uint64_t seed) {
  return build_scenario(nlohmann::json{
      {"network", {{"macro_count", 3}, {"picos_per_macro", 1}, {"test_points", 12}}}, {"seed", seed}});
}

}  // namespace

TEST_CASE("rate balance on a single link", "[feasibility]") {
  RateTensor r(1, 1, 1);
  r.at(0, 0, 0) = 10.0;
  const std::vector<double> d{4.0};
  for (Engine e : {Engine::direct, Engine::cutplane}) {
    const BalanceResult bal = rate_balance(r, d, e);
    CHECK_THAT(bal.R_sum, WithinAbs(10.0, 1e-9));
    REQUIRE(bal.allocation.alpha.size() == 1);
    CHECK_THAT(bal.allocation.alpha[0].value, WithinAbs(1.0, 1e-9));
    CHECK(is_feasible(bal, d));
  }
}

TEST_CASE("rate balance engines agree on the two-cell instance", "[feasibility]") {
  const RateTensor r = m1();
  const std::vector<double> d{4, 4};
  const BalanceResult a = rate_balance(r, d, Engine::direct);
  const BalanceResult b = rate_balance(r, d, Engine::cutplane);
  // Equal time sharing of patterns 1 and 2 gives 5 and 6; pattern 3 gives
  // 5 + 3 = 8 to TP 1 or 2 + 7 = 9 to TP 2.  The balanced optimum is
  // strictly above 2 * 5.
  CHECK(a.R_sum > 10.0);
  CHECK_THAT(b.R_sum, WithinRel(a.R_sum, 1e-6));
  CHECK(is_feasible(a, d));
}

TEST_CASE("rate balance degenerate inputs", "[feasibility]") {
  SECTION("all rates zero") {
    RateTensor r(2, 2, 3);
    const std::vector<double> d{1, 1};
    for (Engine e : {Engine::direct, Engine::cutplane}) {
      const BalanceResult bal = rate_balance(r, d, e);
      CHECK(bal.R_sum == 0.0);
      CHECK_FALSE(is_feasible(bal, d));
    }
  }
  SECTION("zero total demand is trivially feasible") {
    const RateTensor r = m1();
    const std::vector<double> d{0, 0};
    const BalanceResult bal = rate_balance(r, d, Engine::cutplane);
    CHECK(bal.trivial);
    CHECK(is_feasible(bal, d));
  }
  SECTION("boundary of is_feasible") {
    BalanceResult bal;
    const std::vector<double> d{3, 5};
    bal.R_sum = 8.0;
    CHECK(is_feasible(bal, d));
    bal.R_sum = 8.0 * (1 - 1e-6);
    CHECK_FALSE(is_feasible(bal, d));
    bal.R_sum = 0.0;
    CHECK_FALSE(is_feasible(bal, d));
  }
}

TEST_CASE("is_feasible agrees with direct feasibility on random instances", "[feasibility]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t B = 1 + trial % 4, K = 1 + trial % 6;
    const RateTensor r = testing_instances::random_tensor(rng, K, B);
    std::vector<double> d(K);
    const double scale = 4e6 * u(rng) * static_cast<double>(B) / static_cast<double>(K);
    for (auto& v : d) v = u(rng) < 0.1 ? 0.0 : scale * (0.5 + u(rng));
    const bool direct = solve_direct_weighted_lp(r, {}, d).optimal();
    const BalanceResult a = rate_balance(r, d, Engine::cutplane);
    const BalanceResult b = rate_balance(r, d, Engine::direct);
    CHECK(is_feasible(a, d) == direct);
    CHECK(is_feasible(b, d) == direct);
    CHECK_THAT(a.R_sum, WithinRel(b.R_sum, 1e-6));
    (direct ? feasible : infeasible)++;
  }
  CHECK(feasible > 5);
  CHECK(infeasible > 5);
}

TEST_CASE("rate balance is invariant to demand scaling", "[feasibility]") {
  const RateTensor r = m1();
  const std::vector<double> d{1, 3}, d10{10, 30};
  for (Engine e : {Engine::direct, Engine::cutplane})
    CHECK_THAT(rate_balance(r, d, e).R_sum, WithinRel(rate_balance(r, d10, e).R_sum, 1e-9));
}

TEST_CASE("strict start", "[feasibility]") {
  RateTensor r(1, 1, 1);
  r.at(0, 0, 0) = 10.0;
  SECTION("double the demand leaves full slack before shrinking") {
    const std::vector<double> d{5.0};
    const BalanceResult bal = rate_balance(r, d, Engine::direct);
    const StrictStart s = strict_start(bal, r, d, {}, 0.5);
    CHECK(s.strict);
    CHECK_THAT(s.margin, WithinAbs(1.0, 1e-12));
    CHECK_THAT(s.achieved[0], WithinAbs(7.5, 1e-12));
  }
  SECTION("equality is flagged") {
    const std::vector<double> d{10.0};
    const BalanceResult bal = rate_balance(r, d, Engine::direct);
    CHECK(is_feasible(bal, d));
    CHECK_FALSE(strict_start(bal, r, d).strict);
  }
  SECTION("the start cut bounds the master without a box") {
    const RateTensor m = m1();
    const std::vector<double> d{4, 4}, w{1, 1};
    const BalanceResult bal = rate_balance(m, d, Engine::cutplane);
    const StrictStart s = strict_start(bal, m, d, w);
    REQUIRE(s.strict);
    for (double c : s.cut.coef) CHECK(c < 0.0);
    const auto res = cutplane::master_solve({s.cut}, {lp::kInf, lp::kInf});
    CHECK(std::isfinite(res.z));
    CHECK_THAT(res.z, WithinAbs(s.cut.constant, 1e-12));
  }
}

TEST_CASE("l0 surrogate", "[energy]") {
  const double eps = 1e-3;
  CHECK(l0_surrogate(0.0, eps) == 0.0);
  CHECK_THAT(l0_surrogate(1.0, eps), WithinAbs(1.0, 1e-15));
  CHECK_THAT(l0_surrogate(eps, eps), WithinRel(std::log(2.0) / std::log(1.0 + 1.0 / eps), 1e-14));
  CHECK_THROWS(l0_surrogate(-0.1, eps));
  // Approaches the indicator as eps shrinks.
  double prev = 0.0;
  for (double e : {1e-2, 1e-3, 1e-4}) {
    const double v = l0_surrogate(0.05, e);
    CHECK(v > prev);
    CHECK(v < 1.0);
    prev = v;
  }
  CHECK(prev > 0.6);
}

TEST_CASE("surrogate objective and weights", "[energy]") {
  const double eps = 1e-3;
  SECTION("one fixed-power BS") {
    const Scenario sc = power_scenario("macro", 100.0, 1.0);
    const std::vector<double> one{1.0}, zero{0.0};
    CHECK_THAT(surrogate_objective(one, sc, eps), WithinRel(100.0 * std::log(1.001) / std::log(1001.0), 1e-12));
    CHECK_THAT(surrogate_objective(zero, sc, eps), WithinRel(100.0 * std::log(eps) / std::log(1001.0), 1e-12));
    const std::vector<double> near_one{1.0 - eps};
    CHECK_THAT(mm_weights(near_one, sc, eps)[0], WithinRel(100.0 / std::log(1001.0), 1e-12));
    const std::vector<double> lo{0.1}, hi{0.6};
    CHECK(mm_weights(lo, sc, eps)[0] > mm_weights(hi, sc, eps)[0]);
  }
  SECTION("dynamic power only") {
    const Scenario sc = power_scenario("pico", 38.0, 0.0);
    const std::vector<double> rho{0.3};
    CHECK_THAT(surrogate_objective(rho, sc, eps), WithinRel(38.0 * 0.3, 1e-14));
    CHECK(mm_weights(rho, sc, eps)[0] == 38.0);
  }
}

TEST_CASE("total power", "[energy]") {
  const Scenario pico = power_scenario("pico", 38.0, 0.5);
  const std::vector<double> half{0.5}, off{0.0}, tiny{5e-5};
  CHECK_THAT(total_power(pico, half, 1e-4), WithinAbs(28.5, 1e-12));
  CHECK(total_power(pico, off, 1e-4) == 0.0);
  CHECK_THAT(total_power(pico, tiny, 1e-4), WithinAbs(0.5 * 5e-5 * 38.0, 1e-15));
}

TEST_CASE("energy minimization on single links", "[energy]") {
  SolverParams p;
  SECTION("fixed power dominates") {
    const Scenario sc = power_scenario("macro", 439.0, 1.0);
    RateTensor r(1, 1, 1);
    r.at(0, 0, 0) = 10.0;
    const std::vector<double> d{3.0};
    const EnergyResult e = minimize_energy(sc, r, d, p);
    REQUIRE(e.feasible);
    CHECK_THAT(e.allocation.rho[0], WithinAbs(0.3, 1e-6));
    CHECK_THAT(e.total_power, WithinAbs(439.0, 1e-9));
  }
  SECTION("half-loaded pico") {
    const Scenario sc = power_scenario("pico", 38.0, 0.5);
    RateTensor r(1, 1, 1);
    r.at(0, 0, 0) = 10.0;
    const std::vector<double> d{5.0};
    const EnergyResult e = minimize_energy(sc, r, d, p);
    REQUIRE(e.feasible);
    CHECK_THAT(e.total_power, WithinAbs(28.5, 1e-5));
  }
  SECTION("zero demand switches everything off") {
    const Scenario sc = power_scenario("pico", 38.0, 0.5);
    RateTensor r(1, 1, 1);
    r.at(0, 0, 0) = 10.0;
    const std::vector<double> d{0.0};
    const EnergyResult e = minimize_energy(sc, r, d, p);
    CHECK(e.feasible);
    CHECK(e.total_power == 0.0);
    CHECK(e.active_bs.empty());
  }
  SECTION("infeasible demand") {
    const Scenario sc = power_scenario("pico", 38.0, 0.5);
    RateTensor r(1, 1, 1);
    r.at(0, 0, 0) = 10.0;
    const std::vector<double> d{11.0};
    CHECK_FALSE(minimize_energy(sc, r, d, p).feasible);
  }
}

TEST_CASE("weighted LP special cases", "[energy]") {
  SolverParams p;
  SECTION("zero demand") {
    const RateTensor r = m1();
    const std::vector<double> w{1, 1}, d{0, 0};
    const WeightedResult res = solve_weighted_lp(r, w, d, p);
    CHECK(res.objective == 0.0);
    CHECK(res.allocation.alpha.empty());
  }
  SECTION("single pattern, single test point") {
    RateTensor r(1, 2, 1);
    r.at(0, 0, 0) = 8.0;
    r.at(0, 1, 0) = 2.0;
    const std::vector<double> w{3.0, 1.0}, d{1.0};
    // Cost per bit: 3/8 on BS 1, 1/2 on BS 2.
    for (Engine e : {Engine::direct, Engine::cutplane}) {
      p.engine = e;
      CHECK_THAT(solve_weighted_lp(r, w, d, p).objective, WithinAbs(3.0 / 8.0, 1e-8));
    }
  }
  SECTION("two-cell instance, both engines") {
    const RateTensor r = m1();
    const std::vector<double> w{1, 1}, d{4, 4};
    for (Engine e : {Engine::direct, Engine::cutplane}) {
      p.engine = e;
      p.cut.tol_gap = 1e-9;
      CHECK_THAT(solve_weighted_lp(r, w, d, p).objective, WithinAbs(11.0 / 15, 1e-8));
    }
  }
}

TEST_CASE("count_active_patterns", "[energy]") {
  Allocation a(1, 3);
  a.pi[0] = 1.0;
  CHECK(count_active_patterns(a) == 1);
  const std::vector<double> w{1, 1}, d{4, 4};
  CHECK(count_active_patterns(solve_direct_weighted_lp(m1(), w, d).allocation) == 2);
}

TEST_CASE("outer loop descends and converges on a small drop", "[energy]") {
  for (std::uint64_t seed : {1u, 2u}) {
    Scenario sc = small_drop(seed);
    const PatternSet A = enumerate_all(sc.num_bs());
    const RateTensor r = build_rate_tensor(sc, A);
    const RateTensor reuse = build_rate_tensor(sc, reuse1(sc.num_bs()));
    // Half of the Reuse-1 limit keeps both schemes feasible.
    std::vector<double> unit(sc.num_tp(), 1.0);
    const double limit = rate_balance(reuse, unit, Engine::direct).R_sum / static_cast<double>(sc.num_tp());
    std::vector<double> d(sc.num_tp(), 0.5 * limit);
    for (Engine e : {Engine::cutplane, Engine::direct}) {
      SolverParams p;
      p.engine = e;
      const EnergyResult res = minimize_energy(sc, r, d, p);
      REQUIRE(res.feasible);
      CHECK(res.outer_converged);
      for (std::size_t t = 1; t < res.surrogate.size(); ++t)
        CHECK(res.surrogate[t] <= res.surrogate[t - 1] + 1e-9 * std::abs(res.surrogate[t - 1]));
      const auto R = achieved_rates(res.allocation, r);
      for (std::size_t k = 0; k < d.size(); ++k) CHECK(R[k] >= d[k] * (1 - 1e-6));
      CHECK(res.allocation.max_violation() <= 1e-9);
      double expect = 0.0;
      for (std::size_t b : res.active_bs)
        expect += (1 - sc.bss[b].fixed_fraction) * res.allocation.rho[b] * sc.bss[b].op_power_max +
                  sc.bss[b].fixed_fraction * sc.bss[b].op_power_max;
      CHECK_THAT(res.total_power, WithinRel(expect, 1e-9));

      const EnergyResult base = minimize_energy(sc, reuse, d, p);
      REQUIRE(base.feasible);
      CHECK(res.total_power <= base.total_power * (1 + 1e-6));
    }
  }
}
