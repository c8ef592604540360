#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multipac/domain.hpp"
#include "multipac/losses.hpp"

namespace multipac {

// A complete problem statement: labeled distribution, groups, hypotheses,
// and the loss they are scored under. All components share one domain.
struct Instance {
  std::string name;
  Distribution distribution;
  GroupCollection groups;
  HypothesisCollection hypotheses;
  LossFunction loss;
};

// Uniform marginal over n points where one designated point (index 0)
// carries label 0 and every other point carries label 1. False-positive-rate
// style losses have no uniform convergence here: a sample that misses the
// designated point sees no negatives at all, so its empirical rate is 0 by
// the empty-conditional convention while the true rate of the all-ones
// classifier is 1.
Instance no_uniform_convergence_instance(int n);

// Three points {x_S, x_T, x_ST} with masses {0.8, 0.1, 0.1}, groups
// S = {x_S, x_ST} and T = {x_T, x_ST}, labels 0/1/1, hypotheses h0 == 0 and
// h1 == 1, and loss a * IF + b * (0-1) under the metric with
// d(x_S, x_ST) = 0. The S-conditional forces agreement between x_S and x_ST
// while their labels disagree, so no single classifier serves both groups
// tightly.
Instance group_conflict_instance(double a = 0.9, double b = 0.1);

// Scaffold showing why the learner must leave the hypothesis class: groups
// are every singleton support point plus the full support, and hypotheses
// are the pointwise-optimal tabulations (one per support point, 0 elsewhere)
// together with the provided alternatives.
Instance properness_witness_instance(const LossFunction& L, const Distribution& D,
                                     std::vector<Predictor> alternatives,
                                     double grid_r = 1.0 / 64);

struct RandomInstanceConfig {
  int n = 8;
  int num_groups = 2;
  int num_hypotheses = 2;
  double gamma = 0.3;            // minimum group mass
  std::string loss_kind = "squared";  // squared | zero_one | calibration
  double hypothesis_grid = 0.25;
  std::uint64_t seed = 1;
};

// Seeded generator for property tests and CLI experiments. Masses come from
// a flat Dirichlet, labels are uniform, groups are random subsets redrawn
// until they reach mass gamma, hypothesis values live on the given grid.
Instance random_instance(const RandomInstanceConfig& config);

// Canonical text form. serialize -> parse -> serialize is byte-identical,
// and parse(serialize(x)) reproduces x exactly (doubles included).
std::string serialize_instance(const Instance& instance);
Instance parse_instance(const std::string& text);

void save_instance(const Instance& instance, const std::string& path);
Instance load_instance(const std::string& path);

}  // namespace multipac
