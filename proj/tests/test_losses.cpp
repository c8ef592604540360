#include <doctest.h>

#include <cmath>

#include "multipac/errors.hpp"
#include "multipac/losses.hpp"
#include "multipac/rng.hpp"

using namespace multipac;

namespace {

Distribution conflict_dist() {
  return Distribution::make(make_domain({"x_S", "x_T", "x_ST"}), {0.8, 0.1, 0.1},
                            {0.0, 1.0, 1.0});
}

Metric conflict_metric() {
  return Metric::make(3, {0, 1, 0,  //
                          1, 0, 1,  //
                          0, 1, 0});
}

}  // namespace

TEST_SUITE_BEGIN("losses");

TEST_CASE("metric validation") {
  CHECK_THROWS_AS(Metric::make(2, {0, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(Metric::make(2, {0, 1, 2, 0}), InvalidArgument);
  CHECK_THROWS_AS(Metric::make(2, {0.5, 1, 1, 0}), InvalidArgument);
  CHECK_THROWS_AS(Metric::make(2, {0, -1, -1, 0}), InvalidArgument);
  Metric m = Metric::make(2, {0, 0.5, 0.5, 0});
  CHECK(m.at(0, 1) == 0.5);
  CHECK(m.zero(0, 0));
}

TEST_CASE("loss factory validation") {
  CHECK_THROWS_AS(LossFunction::calibration(0.0), InvalidArgument);
  CHECK_THROWS_AS(LossFunction::error_rates(0.7, 0.7), InvalidArgument);
  CHECK_THROWS_AS(LossFunction::error_rates(-0.1, 0.5), InvalidArgument);
  CHECK_THROWS_AS(
      LossFunction::if_plus_decomposable(0.9, 0.2, conflict_metric()), InvalidArgument);
}

TEST_CASE("decomposable losses on the conflict distribution") {
  Distribution D = conflict_dist();
  LossFunction zo = LossFunction::decomposable(PerExampleLoss::zero_one);
  LossFunction sq = LossFunction::decomposable(PerExampleLoss::squared);

  // h == 0 errs exactly on the label-1 mass; h == 1 errs on the rest.
  CHECK(loss(zo, D, make_predictor("h0", {0, 0, 0})) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(loss(zo, D, make_predictor("h1", {1, 1, 1})) == doctest::Approx(0.8).epsilon(1e-12));
  // Constant 1/2 under squared loss costs 1/4 everywhere.
  CHECK(loss(sq, D, make_predictor("h", {0.5, 0.5, 0.5})) ==
        doctest::Approx(0.25).epsilon(1e-12));
  // Predicting the conditional exactly leaves the Bayes term only (0 here).
  CHECK(loss(sq, D, make_predictor("z", {0.0, 1.0, 1.0})) == 0.0);
}

TEST_CASE("calibration loss aggregates within buckets") {
  LossFunction cal = LossFunction::calibration(0.1);
  Domain dom = make_domain({"a", "b"});
  Distribution D = Distribution::make(dom, {0.5, 0.5}, {0.0, 1.0});

  // Both points land in the same prediction bucket; their label average
  // matches the prediction average, so the miscalibration cancels.
  CHECK(loss(cal, D, make_predictor("h", {0.5, 0.5})) == doctest::Approx(0.0));
  CHECK(loss(cal, D, make_predictor("h", {0.5, 0.52})) ==
        doctest::Approx(0.01).epsilon(1e-9));
  // Distinct buckets: each contributes its own gap.
  CHECK(loss(cal, D, make_predictor("h", {0.1, 0.9})) ==
        doctest::Approx(0.1).epsilon(1e-9));
  // Perfect calibration at the endpoints.
  CHECK(loss(cal, D, make_predictor("h", {0.0, 1.0})) == 0.0);
}

TEST_CASE("if_plus_decomposable matches the hand-computed conflict values") {
  Distribution D = conflict_dist();
  LossFunction L = LossFunction::if_plus_decomposable(0.9, 0.1, conflict_metric());
  Group S{"S", {0, 2}};
  Group T{"T", {1, 2}};
  Distribution DS = D.restricted(S);
  Distribution DT = D.restricted(T);

  Predictor h0 = make_predictor("h0", {0, 0, 0});
  Predictor h1 = make_predictor("h1", {1, 1, 1});
  Predictor split = make_predictor("split", {0, 1, 1});

  CHECK(loss(L, DS, h0) == doctest::Approx(0.1 / 9).epsilon(1e-12));
  CHECK(loss(L, DS, h1) == doctest::Approx(0.8 / 9).epsilon(1e-12));
  CHECK(loss(L, DT, h1) == 0.0);
  CHECK(loss(L, DT, h0) == doctest::Approx(0.1).epsilon(1e-12));
  // Disagreeing on the metrically-identical pair pays the IF term:
  // 2 * (8/9) * (1/9) ordered pair mass, weighted by a.
  CHECK(loss(L, DS, split) ==
        doctest::Approx(0.9 * 2 * (8.0 / 9) * (1.0 / 9)).epsilon(1e-12));

  CHECK_THROWS_AS(loss(L, D, make_predictor("soft", {0.5, 0, 0})), NonBinaryPredictor);
}

TEST_CASE("error_rates loss and the empty-conditional convention") {
  Distribution D = conflict_dist();
  LossFunction L = LossFunction::error_rates(0.5, 0.5);
  // h == 1: every negative (x_S) is a false positive, no false negatives.
  CHECK(loss(L, D, make_predictor("h1", {1, 1, 1})) == doctest::Approx(0.5).epsilon(1e-12));
  // h == 0: reverse.
  CHECK(loss(L, D, make_predictor("h0", {0, 0, 0})) == doctest::Approx(0.5).epsilon(1e-12));

  // All labels deterministic 1: the FPR condition is empty, taken as 0.
  Distribution all_pos =
      Distribution::make(make_domain({"a", "b"}), {0.5, 0.5}, {1.0, 1.0});
  LossFlags flags;
  CHECK(loss(L, all_pos, make_predictor("h1", {1, 1}), &flags) == 0.0);
  CHECK(flags.empty_conditional);

  // Pure FNR never consults the empty FPR condition: no flag.
  LossFlags flags2;
  LossFunction fnr_only = LossFunction::error_rates(0.0, 1.0);
  CHECK(loss(fnr_only, all_pos, make_predictor("h0", {0, 0}), &flags2) == 1.0);
  CHECK_FALSE(flags2.empty_conditional);

  CHECK_THROWS_AS(loss(L, D, make_predictor("soft", {0.5, 1, 1})), NonBinaryPredictor);
}

TEST_CASE("empirical loss matches hand counts and rejects empty samples") {
  Domain dom = make_domain({"a", "b"});
  LossFunction zo = LossFunction::decomposable(PerExampleLoss::zero_one);
  Sample s{{{0, 1}, {0, 0}, {1, 1}, {0, 1}}};
  // h == 1 errs once (the single 0 label) out of four records.
  CHECK(empirical_loss(zo, dom, s, make_predictor("h1", {1, 1})) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(empirical_loss(zo, dom, Sample{}, make_predictor("h1", {1, 1})),
                  EmptySample);
}

TEST_CASE("every loss evaluation stays in [0,1] (randomized)") {
  Rng rng(2024);
  Metric id3 = Metric::make(3, {0, 1, 1, 1, 0, 1, 1, 1, 0});
  Metric glue3 = conflict_metric();
  std::vector<LossFunction> losses = {
      LossFunction::decomposable(PerExampleLoss::zero_one),
      LossFunction::decomposable(PerExampleLoss::squared),
      LossFunction::calibration(0.1),
      LossFunction::calibration(0.25),
      LossFunction::if_plus_decomposable(0.6, 0.4, glue3),
      LossFunction::if_plus_decomposable(1.0, 0.0, id3),
      LossFunction::error_rates(0.5, 0.5),
      LossFunction::error_rates(1.0, 0.0),
  };
  Domain dom = make_domain({"a", "b", "c"});
  int evaluations = 0;
  for (int it = 0; it < 1250; ++it) {
    std::vector<double> mass(3), z(3);
    double total = 0.0;
    for (auto& m : mass) total += (m = rng.next_double() + 1e-3);
    for (auto& m : mass) m /= total;
    for (auto& v : z) v = rng.next_double();
    Distribution D = Distribution::make(dom, mass, z);
    for (const auto& L : losses) {
      std::vector<double> values(3);
      for (auto& v : values)
        v = L.binary_only() ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : rng.next_double();
      double out = loss(L, D, Predictor{"h", values});
      CHECK(out >= 0.0);
      CHECK(out <= 1.0);
      ++evaluations;
    }
  }
  CHECK(evaluations == 10000);
}

TEST_CASE("unambiguity matrix over the loss kinds") {
  LossFunction sq = LossFunction::decomposable(PerExampleLoss::squared);
  LossFunction zo = LossFunction::decomposable(PerExampleLoss::zero_one);
  LossFunction cal = LossFunction::calibration(0.1);
  LossFunction er_tied = LossFunction::error_rates(0.5, 0.5);
  LossFunction er_skew = LossFunction::error_rates(0.7, 0.3);
  LossFunction ifd = LossFunction::if_plus_decomposable(0.9, 0.1, conflict_metric());

  CHECK(check_unambiguity(sq, 0.37).unique);
  CHECK(check_unambiguity(cal, 0.42).unique);
  CHECK(check_unambiguity(zo, 0.7).unique);
  CHECK(check_unambiguity(ifd, 0.8).unique);

  // 0-1 loss at z = 1/2: both endpoints are minimizers, a full unit apart.
  UnambiguityReport tie = check_unambiguity(zo, 0.5);
  CHECK_FALSE(tie.unique);
  CHECK(tie.minimizers == std::vector<double>{0.0, 1.0});

  // Equal-weight error rates tie at every interior z.
  CHECK_FALSE(check_unambiguity(er_tied, 0.3).unique);
  CHECK(check_unambiguity(er_skew, 0.3).unique);

  // Degenerate conditionals: the minimizer set is an artifact of the
  // empty-conditional convention, so uniqueness is refused.
  UnambiguityReport deg = check_unambiguity(er_skew, 0.0);
  CHECK(deg.degenerate);
  CHECK_FALSE(deg.unique);
  CHECK_FALSE(check_unambiguity(er_skew, 1.0).unique);
}

TEST_CASE("derive_f: closed forms, refinement, ambiguity") {
  LossFunction sq = LossFunction::decomposable(PerExampleLoss::squared);
  LossFunction zo = LossFunction::decomposable(PerExampleLoss::zero_one);
  LossFunction cal = LossFunction::calibration(0.1);

  // Squared loss: grid plus refinement lands within r/16 of z itself.
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    double z = rng.next_double();
    CHECK(std::abs(derive_f(sq, z) - z) <= 1.0 / 64 / 8);
  }
  CHECK(derive_f(cal, 0.42) == doctest::Approx(0.42).epsilon(0.01));
  CHECK(derive_f(zo, 0.7) == 1.0);
  CHECK(derive_f(zo, 0.2) == 0.0);
  CHECK_THROWS_AS(derive_f(zo, 0.5), Ambiguous);

  LossFunction er = LossFunction::error_rates(0.5, 0.5);
  CHECK_THROWS_AS(derive_f(er, 0.3), Ambiguous);
  CHECK(derive_f(LossFunction::error_rates(0.7, 0.3), 0.3) == 0.0);
}

TEST_CASE("proper transform agrees with derive_f and is total") {
  LossFunction sq = LossFunction::decomposable(PerExampleLoss::squared);
  LossFunction zo = LossFunction::decomposable(PerExampleLoss::zero_one);
  FProperTransform fsq = FProperTransform::derive(sq);
  FProperTransform fzo = FProperTransform::derive(zo);

  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    double z = rng.next_double();
    CHECK(fsq(0, z) == z);  // closed form
    CHECK(std::abs(fsq(0, z) - derive_f(sq, z)) <= 1.0 / 64 / 8);
    if (std::abs(z - 0.5) > 0.01) CHECK(fzo(0, z) == derive_f(zo, z));
  }
  // Total at the tie: the closed-form threshold resolves z = 1/2 upward.
  CHECK(fzo(0, 0.5) == 1.0);

  Predictor p = make_predictor("p", {0.2, 0.7, 0.5});
  Predictor hp = fzo.compose(p, "h");
  CHECK(hp.values == std::vector<double>{0.0, 1.0, 1.0});
  CHECK(hp.name == "h");
}

TEST_CASE("uniform convergence bounds are pinned") {
  LossFunction dec = LossFunction::decomposable(PerExampleLoss::zero_one);
  LossFunction cal = LossFunction::calibration(0.1);
  LossFunction ifd = LossFunction::if_plus_decomposable(0.9, 0.1, conflict_metric());
  LossFunction er = LossFunction::error_rates(1.0, 0.0);

  CHECK(dec.uc_sample_bound(0.1, 0.1, 10) == 265);
  // Halving eps quadruples the bound (up to ceiling).
  CHECK(dec.uc_sample_bound(0.05, 0.1, 10) == 1060);
  CHECK(dec.uc_sample_bound(0.1, 0.1, 1) == 150);
  CHECK(cal.uc_sample_bound(0.1, 0.1, 10) == 2120);
  CHECK(ifd.uc_sample_bound(0.1, 0.1, 10) == 600);
  CHECK_THROWS_AS(er.uc_sample_bound(0.1, 0.1, 10), NoUniformConvergence);

  CHECK_THROWS_AS(dec.uc_sample_bound(0.0, 0.1, 1), InvalidArgument);
  CHECK_THROWS_AS(dec.uc_sample_bound(0.1, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(dec.uc_sample_bound(0.1, 0.1, 0), InvalidArgument);
}

TEST_CASE("loss descriptions are canonical") {
  CHECK(LossFunction::decomposable(PerExampleLoss::squared).describe() ==
        "decomposable ell=squared");
  CHECK(LossFunction::calibration(0.1).describe() == "calibration lambda=0.1");
  CHECK(LossFunction::error_rates(0.5, 0.5).describe() == "error_rates a=0.5 b=0.5");
  CHECK(LossFunction::if_plus_decomposable(0.9, 0.1, conflict_metric()).describe() ==
        "if_plus_decomposable a=0.9 b=0.1 ell=zero_one");
}

TEST_SUITE_END();
