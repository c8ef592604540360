#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multipac/domain.hpp"
#include "multipac/losses.hpp"

namespace multipac {

// Value and argmin of L(D, .) over a hypothesis collection. Ties go to the
// earliest hypothesis, so results are deterministic in collection order.
struct BestInClass {
  double value = 0.0;
  std::string best;
};

BestInClass best_in_class(const LossFunction& L, const Distribution& D,
                          const HypothesisCollection& H);

// One row of a multi-group slack audit: how far h is from the best
// hypothesis on the group-conditional distribution.
struct SlackRow {
  std::string group;
  double group_mass = 0.0;
  double model_loss = 0.0;
  double baseline = 0.0;
  std::string baseline_hypothesis;
  double slack = 0.0;
  bool ok = false;
};

struct SlackTable {
  std::vector<SlackRow> rows;
  double max_slack = 0.0;
  bool all_ok = false;
};

// Checks h group-by-group against eps. Every group must have positive mass.
SlackTable verify_multipac(const LossFunction& L, const Distribution& D,
                           const GroupCollection& G, const HypothesisCollection& H,
                           double eps, const Predictor& h);

// Brute-force existence check: is there ANY grid predictor meeting slack eps
// on every group simultaneously? Candidate values per support point are
// {0, grid_r, ..., 1}, or {0, 1} for binary-only losses; off-support points
// are pinned to 0 since no loss can see them.
struct FeasibilityVerdict {
  bool feasible = false;
  std::optional<Predictor> witness;
  double eps = 0.0;
  double grid_r = 0.0;
  // Per group: the smallest slack any examined candidate achieved on that
  // group alone.
  std::vector<std::string> group_names;
  std::vector<double> group_min_slack;
  // Smallest worst-case slack over examined candidates; equals the true
  // minimax over the grid when the enumeration was exhaustive.
  double minimax_slack = 0.0;
  std::string minimax_witness;  // serialized candidate values
  std::uint64_t candidates_examined = 0;
  std::uint64_t candidates_total = 0;
  bool exhaustive = false;
};

// `guard` bounds the candidate count; beyond it the oracle throws TooLarge
// instead of grinding forever. With `exhaustive` the search does not stop at
// the first witness, so minimax_slack is exact.
FeasibilityVerdict feasible_multipac(const LossFunction& L, const Distribution& D,
                                     const GroupCollection& G,
                                     const HypothesisCollection& H, double eps,
                                     double grid_r = 0.125,
                                     std::uint64_t guard = 100'000'000,
                                     bool exhaustive = false);

}  // namespace multipac
