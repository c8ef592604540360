#include <doctest.h>

#include <cmath>
#include <vector>

#include "multipac/errors.hpp"
#include "multipac/instances.hpp"
#include "multipac/multigroup.hpp"
#include "multipac/rng.hpp"

using namespace multipac;

TEST_SUITE_BEGIN("multigroup");

TEST_CASE("schedule splits the budgets and pins the sample arithmetic") {
  LossFunction zo = LossFunction::decomposable(PerExampleLoss::zero_one);
  Schedule s = schedule_params(zo, 0.4, 0.4, 0.5, 9);
  CHECK(s.eps_prime == 0.1);
  CHECK(s.alpha == 0.1);
  CHECK(s.delta_prime == 0.1);
  CHECK(s.eta == 0.1);
  CHECK(s.tau == 0.1);
  // uc bound at (0.1, 0.1, |H|+1 = 10) is 265; k = ceil(20 ln(10) * 265).
  CHECK(s.k_g == 265);
  CHECK(s.k == 12204);
  CHECK(s.rng_algorithm == kRngAlgorithmId);

  Instance conflict = group_conflict_instance();
  Schedule c = schedule_params(conflict.loss, 0.4, 0.4, 0.2, 2);
  CHECK(c.k_g == 479);
  CHECK(c.k == 55147);

  Schedule cal = schedule_params(LossFunction::calibration(), 0.4, 0.4, 0.5, 9);
  CHECK(cal.k_g == 2120);  // eight times the decomposable bound
  CHECK(cal.k == 97630);

  CHECK_THROWS_AS(schedule_params(zo, 0.0, 0.4, 0.5, 9), InvalidArgument);
  CHECK_THROWS_AS(schedule_params(zo, 0.4, 1.0, 0.5, 9), InvalidArgument);
  CHECK_THROWS_AS(schedule_params(zo, 0.4, 0.4, 0.0, 9), InvalidArgument);
  CHECK_THROWS_AS(schedule_params(zo, 0.4, 0.4, 1.5, 9), InvalidArgument);
  CHECK_THROWS_AS(schedule_params(zo, 0.4, 0.4, 0.5, 0), InvalidArgument);
  CHECK_THROWS_AS(schedule_params(LossFunction::error_rates(0.5, 0.5), 0.4, 0.4, 0.5, 9),
                  NoUniformConvergence);
}

TEST_CASE("family construction covers the group-hypothesis grid") {
  Instance inst = group_conflict_instance();
  FProperTransform f = FProperTransform::derive(inst.loss);
  Schedule s = schedule_params(inst.loss, 0.4, 0.4, 0.2, inst.hypotheses.size());

  std::vector<Distinguisher> family =
      build_family(inst.loss, f, inst.groups, inst.hypotheses, s, 3);
  REQUIRE(family.size() == 4);
  CHECK(family[0].name == "g=S|h=h0|k=55147|alpha=0.1");
  CHECK(family[3].name == "g=T|h=h1|k=55147|alpha=0.1");
  for (const auto& d : family) {
    CHECK(d.k == 55147);
    CHECK(d.alpha == 0.1);
  }

  Schedule huge = s;
  huge.k = 3'000'000'000ULL;  // beyond int tuple arity
  CHECK_THROWS_AS(build_family(inst.loss, f, inst.groups, inst.hypotheses, huge, 3),
                  TooLarge);
}

TEST_CASE("end-to-end learner meets the slack contract on the conflict instance") {
  Instance inst = group_conflict_instance();
  SampleSource src = SampleSource::simulation(inst.distribution);

  MultiGroupResult res =
      multigroup_learn(inst.loss, src, inst.groups, inst.hypotheses, 0.4, 0.4, 0.2, 99);

  CHECK(res.schedule.k == 55147);
  CHECK(res.learner_path == "tabular");
  CHECK(res.learner_rounds == 0);
  // Phase 1 draws 4k tuples' worth of points and already meets every
  // per-point target.
  CHECK(res.samples_consumed == 220588);
  CHECK(res.p_tilde.values == std::vector<double>{0.0, 1.0, 1.0});
  CHECK(res.h_final.name == "h_final");
  CHECK(res.h_final.values == std::vector<double>{0.0, 1.0, 1.0});

  REQUIRE(res.slack.has_value());
  REQUIRE(res.slack->rows.size() == 2);
  // On S the returned classifier pays the cross-group fairness term
  // 0.9 * 2 * (8/9) * (1/9) against a baseline of 0.1/9: slack exactly 1/6.
  CHECK(res.slack->rows[0].group == "S");
  CHECK(res.slack->rows[0].slack == doctest::Approx(1.0 / 6).epsilon(1e-9));
  CHECK(res.slack->rows[1].slack <= 1e-12);
  CHECK(res.slack->max_slack == res.slack->rows[0].slack);
  CHECK(res.slack->all_ok);
  CHECK(res.pass);
}

TEST_CASE("pool-fed learner reports no slack table") {
  Instance inst = group_conflict_instance();
  Sample pool_records = inst.distribution.draw(300000, 5150);
  SampleSource pool = SampleSource::pool(inst.distribution.domain(), pool_records);

  MultiGroupResult res =
      multigroup_learn(inst.loss, pool, inst.groups, inst.hypotheses, 0.4, 0.4, 0.2, 99);
  CHECK(res.learner_path == "tabular");
  CHECK(res.p_tilde.values == std::vector<double>{0.0, 1.0, 1.0});
  CHECK_FALSE(res.slack.has_value());
  CHECK_FALSE(res.pass);
}

TEST_CASE("learner rejects groups lighter than the promised gamma") {
  Instance inst = group_conflict_instance();
  SampleSource src = SampleSource::simulation(inst.distribution);
  // Group T has mass 0.2 < 0.25.
  CHECK_THROWS_AS(
      multigroup_learn(inst.loss, src, inst.groups, inst.hypotheses, 0.4, 0.4, 0.25, 1),
      InvalidArgument);
}

TEST_CASE("learner rejects hypotheses over a different domain") {
  Instance inst = group_conflict_instance();
  Distribution two = Distribution::make(make_domain({"a", "b"}), {0.5, 0.5}, {0.0, 1.0});
  SampleSource src = SampleSource::simulation(two);
  CHECK_THROWS_AS(multigroup_learn(LossFunction::decomposable(PerExampleLoss::zero_one),
                                   src, inst.groups, inst.hypotheses, 0.4, 0.4, 0.2, 1),
                  InvalidArgument);
}

TEST_CASE("uc_estimate exposes the missing-negatives failure mode") {
  Instance inst = no_uniform_convergence_instance(10000);
  UcSummary s = uc_estimate(inst.loss, inst.distribution, inst.hypotheses, 10, 2000, 77);
  CHECK(s.m == 10);
  CHECK(s.reps == 2000);
  // A 10-sample misses the lone negative point with probability
  // (1 - 1e-4)^10 = 0.99900045, and then the empirical rate is 0 against a
  // true rate of 1.
  CHECK(std::abs(s.frac_dev_eq_1 - 0.99900045) <= 0.005);
  CHECK(s.max_dev == 1.0);
  CHECK(s.p50 == 1.0);
  CHECK(s.mean == doctest::Approx(s.frac_dev_eq_1));  // deviations are 0 or 1 here
}

TEST_CASE("uc_estimate concentrates at the prescribed sample bound") {
  RandomInstanceConfig cfg;
  cfg.n = 8;
  cfg.num_hypotheses = 9;
  cfg.seed = 21;
  Instance inst = random_instance(cfg);
  auto m = static_cast<int>(inst.loss.uc_sample_bound(0.1, 0.1, 9));
  CHECK(m == 260);

  UcSummary s = uc_estimate(inst.loss, inst.distribution, inst.hypotheses, m, 400, 13);
  // The bound promises P(dev > 0.1) <= 0.1; Hoeffding slack makes the
  // observed tail far smaller.
  CHECK(s.p90 <= 0.1);
  CHECK(s.max_dev <= 0.2);
  CHECK(s.mean <= 0.05);
  CHECK(s.frac_dev_eq_1 == 0.0);

  CHECK_THROWS_AS(uc_estimate(inst.loss, inst.distribution, inst.hypotheses, 0, 10, 1),
                  InvalidArgument);
  CHECK_THROWS_AS(uc_estimate(inst.loss, inst.distribution, inst.hypotheses, 10, 0, 1),
                  InvalidArgument);
  CHECK_THROWS_AS(
      uc_estimate(inst.loss, inst.distribution, HypothesisCollection{}, 10, 10, 1),
      InvalidArgument);
}

TEST_SUITE_END();
