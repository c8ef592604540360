#include "multipac/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multipac/errors.hpp"
#include "multipac/text.hpp"

namespace multipac {

BestInClass best_in_class(const LossFunction& L, const Distribution& D,
                          const HypothesisCollection& H) {
  if (H.items.empty()) throw InvalidArgument("best_in_class: empty hypothesis collection");
  BestInClass out;
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& h : H.items) {
    double v = loss(L, D, h);
    if (v < out.value) {
      out.value = v;
      out.best = h.name;
    }
  }
  return out;
}

SlackTable verify_multipac(const LossFunction& L, const Distribution& D,
                           const GroupCollection& G, const HypothesisCollection& H,
                           double eps, const Predictor& h) {
  if (!(eps >= 0.0)) throw InvalidArgument("verify_multipac: eps must be >= 0");
  if (G.items.empty()) throw InvalidArgument("verify_multipac: no groups");
  SlackTable table;
  table.all_ok = true;
  table.max_slack = -std::numeric_limits<double>::infinity();
  for (const auto& g : G.items) {
    Distribution Dg = D.restricted(g);  // throws on zero-mass groups
    BestInClass base = best_in_class(L, Dg, H);
    SlackRow row;
    row.group = g.name;
    row.group_mass = D.group_mass(g);
    row.model_loss = loss(L, Dg, h);
    row.baseline = base.value;
    row.baseline_hypothesis = base.best;
    row.slack = row.model_loss - row.baseline;
    row.ok = row.slack <= eps + 1e-12;
    table.all_ok = table.all_ok && row.ok;
    table.max_slack = std::max(table.max_slack, row.slack);
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::vector<double> oracle_grid(const LossFunction& L, double grid_r) {
  if (L.binary_only()) return {0.0, 1.0};
  if (!(grid_r > 0.0 && grid_r <= 0.5))
    throw InvalidArgument("feasible_multipac: grid resolution outside (0, 0.5]");
  std::vector<double> grid;
  for (double v = 0.0; v < 1.0 - 1e-12; v += grid_r) grid.push_back(v);
  grid.push_back(1.0);
  return grid;
}

std::string describe_candidate(const std::vector<int>& support,
                               const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) out += ",";
    out += format_g17(values[static_cast<std::size_t>(support[i])]);
  }
  return out;
}

}  // namespace

FeasibilityVerdict feasible_multipac(const LossFunction& L, const Distribution& D,
                                     const GroupCollection& G,
                                     const HypothesisCollection& H, double eps,
                                     double grid_r, std::uint64_t guard,
                                     bool exhaustive) {
  if (!(eps >= 0.0)) throw InvalidArgument("feasible_multipac: eps must be >= 0");
  if (G.items.empty()) throw InvalidArgument("feasible_multipac: no groups");

  const std::vector<double> grid = oracle_grid(L, grid_r);
  const std::vector<int>& support = D.support();
  const auto s = support.size();
  const auto g_count = static_cast<std::uint64_t>(grid.size());

  // Candidate count with overflow guard.
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < s; ++i) {
    if (total > guard / g_count + 1)
      throw TooLarge("feasible_multipac: grid^support exceeds the enumeration guard");
    total *= g_count;
  }
  if (total > guard)
    throw TooLarge("feasible_multipac: " + std::to_string(total) +
                   " candidates exceed the enumeration guard of " + std::to_string(guard));

  // Group-conditional views and baselines, computed once.
  std::vector<Distribution> restricted;
  restricted.reserve(G.items.size());
  std::vector<double> baselines;
  for (const auto& g : G.items) {
    restricted.push_back(D.restricted(g));
    baselines.push_back(best_in_class(L, restricted.back(), H).value);
  }

  FeasibilityVerdict verdict;
  verdict.eps = eps;
  verdict.grid_r = L.binary_only() ? 1.0 : grid_r;
  verdict.candidates_total = total;
  verdict.exhaustive = exhaustive;
  verdict.group_min_slack.assign(G.items.size(),
                                 std::numeric_limits<double>::infinity());
  for (const auto& g : G.items) verdict.group_names.push_back(g.name);
  verdict.minimax_slack = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> odo(s, 0);
  std::vector<double> values(static_cast<std::size_t>(D.domain_size()), 0.0);
  for (int x : support) values[static_cast<std::size_t>(x)] = grid[0];

  for (std::uint64_t c = 0; c < total; ++c) {
    ++verdict.candidates_examined;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < restricted.size(); ++gi) {
      DistView view = restricted[gi].view();
      double slack = L.evaluate(view, values.data()) - baselines[gi];
      verdict.group_min_slack[gi] = std::min(verdict.group_min_slack[gi], slack);
      worst = std::max(worst, slack);
    }
    if (worst < verdict.minimax_slack) {
      verdict.minimax_slack = worst;
      verdict.minimax_witness = describe_candidate(support, values);
    }
    if (worst <= eps + 1e-12 && !verdict.witness) {
      verdict.feasible = true;
      std::vector<double> copy = values;
      verdict.witness = make_predictor("witness", std::move(copy));
      if (!exhaustive) break;
    }
    // Advance the odometer.
    for (std::size_t pos = 0; pos < s; ++pos) {
      if (++odo[pos] < grid.size()) {
        values[static_cast<std::size_t>(support[pos])] = grid[odo[pos]];
        break;
      }
      odo[pos] = 0;
      values[static_cast<std::size_t>(support[pos])] = grid[0];
    }
  }
  return verdict;
}

}  // namespace multipac
