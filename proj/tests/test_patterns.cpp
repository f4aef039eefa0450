#include "hetnet/patterns.hpp"

#include <catch_amalgamated.hpp>

#include <set>

using namespace hetnet;

namespace {

Scenario fifteen_cells() {
  return build_scenario(nlohmann::json{{"network", {{"macro_count", 3}, {"picos_per_macro", 4}, {"test_points", 10}}},
                                       {"seed", 3}});
}

std::set<std::string> row_set(const PatternSet& p) {
  std::set<std::string> s;
  for (std::size_t i = 0; i < p.num_patterns(); ++i) s.insert(p.row_string(i));
  return s;
}

}  // namespace

TEST_CASE("full enumeration has 2^B distinct rows", "[patterns]") {
  const PatternSet all = enumerate_all(15);
  CHECK(all.num_patterns() == 32768);
  CHECK(row_set(all).size() == 32768);
  CHECK(all.active_count(0) == 0);

  const PatternSet one = enumerate_all(1);
  REQUIRE(one.num_patterns() == 2);
  CHECK(one.row_string(0) == "0");
  CHECK(one.row_string(1) == "1");

  CHECK(row_set(enumerate_all(2)) == std::set<std::string>{"00", "01", "10", "11"});
  CHECK_THROWS_AS(enumerate_all(21), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_all(0), std::invalid_argument);
}

TEST_CASE("reuse-1 is a single all-on row", "[patterns]") {
  const PatternSet r = reuse1(15);
  REQUIRE(r.num_patterns() == 1);
  CHECK(r.row_string(0) == std::string(15, '1'));
  CHECK(reuse1(1).row_string(0) == "1");
  CHECK(enumerate_all(4).merged(reuse1(4)).num_patterns() == 16);
}

TEST_CASE("preselection families have the expected sizes", "[patterns]") {
  const Scenario sc = fifteen_cells();
  CHECK(preselect(sc, parse_strategies("all_on,leave_one_out")).num_patterns() == 16);
  CHECK(preselect(sc, parse_strategies("all_on,single_bs,macros_only")).num_patterns() == 17);
  const PatternSet on = preselect(sc, parse_strategies("all_on"));
  CHECK(row_set(on) == row_set(reuse1(15)));
  CHECK(preselect(sc, parse_strategies("macro_plus_local_picos")).num_patterns() == 4);
}

TEST_CASE("preselection is a subset of full enumeration", "[patterns]") {
  const Scenario sc = fifteen_cells();
  const PatternSet p = preselect(
      sc, parse_strategies("all_on,leave_one_out,macros_only,single_bs,macro_plus_local_picos,random:200:5"));
  const std::set<std::string> all = row_set(enumerate_all(15));
  for (std::size_t i = 0; i < p.num_patterns(); ++i) CHECK(all.count(p.row_string(i)) == 1);
  CHECK(row_set(p).size() == p.num_patterns());
}

TEST_CASE("random families are nested and sized exactly", "[patterns]") {
  const Scenario sc = fifteen_cells();
  const PatternSet small = preselect(sc, parse_strategies("random:63:1"));
  const PatternSet large = preselect(sc, parse_strategies("random:511:1"));
  CHECK(small.num_patterns() == 64);
  CHECK(large.num_patterns() == 512);
  for (std::size_t i = 0; i < small.num_patterns(); ++i) CHECK(small.row_string(i) == large.row_string(i));
}

TEST_CASE("strategy parsing rejects unknown names", "[patterns]") {
  CHECK_THROWS_AS(parse_strategies("all_on,everything"), config_error);
  CHECK_THROWS_AS(parse_strategies("random:x"), config_error);
  CHECK(parse_strategies("random:4").items.at(0).count == 4);
}

TEST_CASE("pattern sets round-trip through JSON", "[patterns]") {
  const PatternSet p = enumerate_all(3);
  const PatternSet q = PatternSet::from_json(p.to_json());
  CHECK(q.to_json() == p.to_json());
  CHECK(q.hash() == p.hash());
  CHECK_THROWS_AS(PatternSet::from_json(nlohmann::json::array({"01", "1"})), config_error);
  CHECK_THROWS_AS(PatternSet::from_json(nlohmann::json::array({"0x"})), config_error);
}

TEST_CASE("restriction keeps rows using allowed stations only", "[patterns]") {
  const PatternSet r = enumerate_all(3).restricted_to({true, false, true});
  CHECK(row_set(r) == std::set<std::string>{"000", "100", "001", "101"});
}
