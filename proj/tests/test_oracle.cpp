#include <doctest.h>

#include <cmath>

#include "multipac/errors.hpp"
#include "multipac/instances.hpp"
#include "multipac/oracle.hpp"

using namespace multipac;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("best_in_class picks the minimum with deterministic tie-breaking") {
  Instance inst = group_conflict_instance();
  const Distribution& D = inst.distribution;
  Distribution DS = D.restricted(inst.groups.items[0]);
  Distribution DT = D.restricted(inst.groups.items[1]);

  BestInClass s = best_in_class(inst.loss, DS, inst.hypotheses);
  CHECK(s.value == doctest::Approx(0.1 / 9).epsilon(1e-12));
  CHECK(s.best == "h0");
  BestInClass t = best_in_class(inst.loss, DT, inst.hypotheses);
  CHECK(t.value == 0.0);
  CHECK(t.best == "h1");

  CHECK_THROWS_AS(best_in_class(inst.loss, D, HypothesisCollection{}), InvalidArgument);
}

TEST_CASE("verify_multipac reports per-group slack for the conflict instance") {
  Instance inst = group_conflict_instance();
  Predictor h1 = inst.hypotheses.items[1];

  SlackTable at_01 = verify_multipac(inst.loss, inst.distribution, inst.groups,
                                     inst.hypotheses, 0.1, h1);
  REQUIRE(at_01.rows.size() == 2);
  // L_S(h1) = 8b/9 against the S baseline b/9: slack 7b/9.
  CHECK(at_01.rows[0].slack == doctest::Approx(7.0 * 0.1 / 9).epsilon(1e-12));
  CHECK(at_01.rows[0].group_mass == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(at_01.rows[1].slack == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(at_01.max_slack == doctest::Approx(7.0 * 0.1 / 9).epsilon(1e-12));
  CHECK(at_01.all_ok);

  SlackTable at_005 = verify_multipac(inst.loss, inst.distribution, inst.groups,
                                      inst.hypotheses, 0.05, h1);
  CHECK_FALSE(at_005.all_ok);
  CHECK_FALSE(at_005.rows[0].ok);
  CHECK(at_005.rows[1].ok);
}

TEST_CASE("feasible_multipac finds witnesses and short-circuits") {
  Instance inst = group_conflict_instance();
  FeasibilityVerdict v = feasible_multipac(inst.loss, inst.distribution, inst.groups,
                                           inst.hypotheses, 0.6);
  CHECK(v.feasible);
  REQUIRE(v.witness);
  CHECK(v.candidates_total == 8);  // binary-only loss: {0,1}^3
  CHECK(v.candidates_examined < v.candidates_total);
}

TEST_CASE("feasible_multipac is exhaustive on infeasible inputs") {
  Instance inst = group_conflict_instance();
  FeasibilityVerdict v = feasible_multipac(inst.loss, inst.distribution, inst.groups,
                                           inst.hypotheses, 0.01);
  CHECK_FALSE(v.feasible);
  CHECK(v.candidates_examined == v.candidates_total);
  CHECK(v.candidates_total == 8);
  // Each group alone is satisfiable exactly...
  CHECK(v.group_min_slack[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.group_min_slack[1] == doctest::Approx(0.0).epsilon(1e-12));
  // ...but no candidate serves both: the (0,1,0) classifier is minimax
  // optimal with worst-group slack b/2.
  CHECK(v.minimax_slack == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(v.minimax_witness == "0,1,0");
}

TEST_CASE("exhaustive mode keeps enumerating past the first witness") {
  Instance inst = group_conflict_instance();
  FeasibilityVerdict v = feasible_multipac(inst.loss, inst.distribution, inst.groups,
                                           inst.hypotheses, 0.6, 0.125, 100000000,
                                           /*exhaustive=*/true);
  CHECK(v.feasible);
  CHECK(v.candidates_examined == 8);
  CHECK(v.minimax_slack == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("enumeration guard throws TooLarge") {
  // 10 binary support points against a guard of 100 candidates.
  std::vector<std::string> names;
  for (int i = 0; i < 10; ++i) names.push_back("p" + std::to_string(i));
  Distribution D = Distribution::make(make_domain(names),
                                      std::vector<double>(10, 0.1),
                                      std::vector<double>(10, 1.0));
  GroupCollection G = make_group_collection({Group{"all", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}}, 10);
  HypothesisCollection H = make_hypothesis_collection(
      {make_predictor("h1", std::vector<double>(10, 1.0))}, 10);
  LossFunction L = LossFunction::error_rates(0.5, 0.5);
  CHECK_THROWS_AS(feasible_multipac(L, D, G, H, 0.1, 0.125, 100), TooLarge);
}

TEST_CASE("zero-mass groups are rejected") {
  Distribution D =
      Distribution::make(make_domain({"a", "b"}), {1.0, 0.0}, {0.0, 1.0});
  GroupCollection G = make_group_collection({Group{"dead", {1}}}, 2);
  HypothesisCollection H =
      make_hypothesis_collection({make_predictor("h", {0.0, 0.0})}, 2);
  LossFunction L = LossFunction::decomposable(PerExampleLoss::zero_one);
  CHECK_THROWS_AS(verify_multipac(L, D, G, H, 0.1, H.items[0]), InvalidArgument);
  CHECK_THROWS_AS(feasible_multipac(L, D, G, H, 0.1), InvalidArgument);
}

TEST_SUITE_END();
