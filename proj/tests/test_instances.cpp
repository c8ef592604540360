#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "multipac/errors.hpp"
#include "multipac/instances.hpp"
#include "multipac/oracle.hpp"

using namespace multipac;

namespace {

bool mentions(const Error& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE_BEGIN("instances");

TEST_CASE("no-uniform-convergence instance anchors") {
  Instance inst = no_uniform_convergence_instance(10000);
  const Distribution& D = inst.distribution;
  CHECK(D.domain_size() == 10000);
  CHECK(D.mass()[0] == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(D.label_prob()[0] == 0.0);
  CHECK(D.label_prob()[1] == 1.0);
  CHECK(D.label_prob()[9999] == 1.0);

  // The all-ones classifier has true false-positive rate exactly 1: the only
  // negative mass sits at the designated point and is always flagged.
  CHECK(loss(inst.loss, D, inst.hypotheses.items[0]) == 1.0);
  CHECK_THROWS_AS(no_uniform_convergence_instance(1), InvalidArgument);
}

TEST_CASE("group-conflict instance anchors") {
  Instance inst = group_conflict_instance();
  CHECK(inst.distribution.mass() == std::vector<double>{0.8, 0.1, 0.1});
  CHECK(inst.distribution.label_prob() == std::vector<double>{0.0, 1.0, 1.0});
  REQUIRE(inst.groups.size() == 2);
  REQUIRE(inst.hypotheses.size() == 2);

  Distribution DS = inst.distribution.restricted(inst.groups.items[0]);
  Distribution DT = inst.distribution.restricted(inst.groups.items[1]);
  CHECK(best_in_class(inst.loss, DS, inst.hypotheses).value ==
        doctest::Approx(0.1 / 9).epsilon(1e-12));
  CHECK(best_in_class(inst.loss, DT, inst.hypotheses).value == 0.0);

  // True minimax threshold over all binary classifiers: b/2.
  FeasibilityVerdict v = feasible_multipac(inst.loss, inst.distribution, inst.groups,
                                           inst.hypotheses, 0.0, 0.125, 1000, true);
  CHECK(v.minimax_slack == doctest::Approx(0.05).epsilon(1e-12));

  CHECK_THROWS_AS(group_conflict_instance(0.9, 0.2), InvalidArgument);
}

TEST_CASE("properness witness wiring") {
  RandomInstanceConfig cfg;
  cfg.n = 4;
  cfg.seed = 3;
  Instance base = random_instance(cfg);
  Instance wit = properness_witness_instance(
      base.loss, base.distribution,
      {make_predictor("alt", {1.0, 1.0, 1.0, 1.0})});

  // One singleton group per support point plus the support group.
  CHECK(wit.groups.size() == base.distribution.support().size() + 1);
  CHECK(wit.groups.items.back().name == "support");
  // Tabulated per-point optima plus the alternative.
  CHECK(wit.hypotheses.size() == base.distribution.support().size() + 1);
  CHECK(wit.hypotheses.items.back().name == "alt");

  // Under squared loss the tabulated optimum at x approximates z(x), so the
  // singleton baseline sits within (refinement width)^2 of the Bayes term
  // z(1-z). Refinement runs to grid_r/16 = 1/1024, hence the 2e-6 bound.
  for (std::size_t i = 0; i < wit.groups.size() - 1; ++i) {
    const Group& g = wit.groups.items[i];
    double z = wit.distribution.label_prob()[static_cast<std::size_t>(g.members[0])];
    Distribution Dx = wit.distribution.restricted(g);
    double baseline = best_in_class(wit.loss, Dx, wit.hypotheses).value;
    CHECK(std::abs(baseline - z * (1 - z)) <= 2e-6);
  }
}

TEST_CASE("random instances respect their configuration") {
  RandomInstanceConfig cfg;
  cfg.n = 8;
  cfg.num_groups = 3;
  cfg.num_hypotheses = 4;
  cfg.gamma = 0.4;
  cfg.seed = 12;
  Instance inst = random_instance(cfg);

  CHECK(inst.distribution.domain_size() == 8);
  CHECK(inst.groups.size() == 3);
  CHECK(inst.hypotheses.size() == 4);
  for (const auto& g : inst.groups.items)
    CHECK(inst.distribution.group_mass(g) >= 0.4);
  for (const auto& h : inst.hypotheses.items)
    for (double v : h.values) {
      double steps = v / 0.25;
      CHECK(std::abs(steps - std::round(steps)) <= 1e-12);
    }

  // Deterministic in the seed.
  CHECK(serialize_instance(random_instance(cfg)) == serialize_instance(inst));
  cfg.seed = 13;
  CHECK(serialize_instance(random_instance(cfg)) != serialize_instance(inst));

  cfg.loss_kind = "nonsense";
  CHECK_THROWS_AS(random_instance(cfg), InvalidArgument);
}

TEST_CASE("serialization round-trips bit-exactly") {
  Instance a = group_conflict_instance();
  std::string text = serialize_instance(a);
  Instance b = parse_instance(text);
  CHECK(serialize_instance(b) == text);
  CHECK(b.name == "group_conflict");
  CHECK(b.distribution.mass() == a.distribution.mass());
  CHECK(b.loss.describe() == a.loss.describe());
  REQUIRE(b.loss.metric());
  CHECK(b.loss.metric()->entries() == a.loss.metric()->entries());

  RandomInstanceConfig cfg;
  cfg.n = 6;
  cfg.loss_kind = "calibration";
  cfg.seed = 77;
  Instance c = random_instance(cfg);
  CHECK(serialize_instance(parse_instance(serialize_instance(c))) ==
        serialize_instance(c));
}

TEST_CASE("save and load through the filesystem") {
  Instance a = group_conflict_instance();
  std::string path = "test_instance_roundtrip.txt";
  save_instance(a, path);
  Instance b = load_instance(path);
  CHECK(serialize_instance(b) == serialize_instance(a));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_instance("does_not_exist_anywhere.txt"), IOFailure);
}

TEST_CASE("parse errors name the offending construct") {
  Instance a = group_conflict_instance();
  std::string good = serialize_instance(a);

  // Unknown loss kind.
  std::string bad_kind = good;
  auto pos = bad_kind.find("loss if_plus_decomposable");
  REQUIRE(pos != std::string::npos);
  bad_kind.replace(pos, std::string("loss if_plus_decomposable").size(), "loss frobnitz");
  try {
    parse_instance(bad_kind);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(mentions(e, "frobnitz"));
  }

  // Truncated file: no end marker.
  std::string truncated = good.substr(0, good.size() - 4);
  try {
    parse_instance(truncated);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(mentions(e, "end"));
  }

  // Missing section.
  std::string no_mass;
  for (std::size_t i = 0; i < good.size();) {
    auto nl = good.find('\n', i);
    std::string line = good.substr(i, nl - i);
    if (line.rfind("mass", 0) != 0) no_mass += line + "\n";
    i = nl + 1;
  }
  try {
    parse_instance(no_mass);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(mentions(e, "mass"));
  }

  // Bad number.
  std::string bad_number = good;
  pos = bad_number.find("0.8");
  bad_number.replace(pos, 3, "ten");
  CHECK_THROWS_AS(parse_instance(bad_number), ParseError);

  // Unknown section tag.
  CHECK_THROWS_AS(parse_instance("multipac-instance v1\nwhatever 1\nend\n"), ParseError);
  // Wrong header.
  CHECK_THROWS_AS(parse_instance("multipac-instance v9\nend\n"), ParseError);

  // Metric attached to a loss kind that takes none.
  std::string stray_metric =
      "multipac-instance v1\n"
      "domain 2\n"
      "points a b\n"
      "mass 0.5 0.5\n"
      "label_prob 0 1\n"
      "group all 0 1\n"
      "hypothesis h 0 0\n"
      "metric_row 0 0 1\n"
      "metric_row 1 1 0\n"
      "loss decomposable ell=squared\n"
      "end\n";
  try {
    parse_instance(stray_metric);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(mentions(e, "metric"));
  }

  // Semantic failure surfaces as ParseError naming the component.
  std::string bad_masses = good;
  pos = bad_masses.find("mass 0.8 0.1 0.1");
  bad_masses.replace(pos, std::string("mass 0.8 0.1 0.1").size(), "mass 0.8 0.1 0.3");
  CHECK_THROWS_AS(parse_instance(bad_masses), ParseError);
}

TEST_SUITE_END();
