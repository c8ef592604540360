#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multipac/domain.hpp"
#include "multipac/losses.hpp"

namespace multipac {

// One entry of the k-tuple a distinguisher inspects: a labeled point together
// with the candidate predictor's value there.
struct TupleRecord {
  int point;
  int label;
  double p;  // candidate prediction at `point`, in [0, 1]
};

// The loss-comparison distinguisher: filter the tuple to the group, tabulate
// the plug-in predictor f_g(x) = f(x, p_i) from the first tuple entry that
// mentions x (0 off-tuple), and accept iff on the group sub-sample f_g beats
// the reference hypothesis by better than the 2*alpha margin:
//
//   accept  <=>  L_S_g(f_g) < L_S_g(h) + 2 * alpha,
//
// accepting vacuously when no tuple point lands in the group.
struct Distinguisher {
  std::string name;
  std::string group_name;
  std::string hypothesis_name;
  LossFunction loss;
  FProperTransform f;
  Group group;
  Predictor hypothesis;
  int k = 0;
  double alpha = 0.0;
};

Distinguisher make_distinguisher(const LossFunction& L, const FProperTransform& f,
                                 const Group& g, const Predictor& h, int k,
                                 double alpha, int domain_size);

// Pure tuple-level decision. Throws WrongArity unless tuple.size() == d.k.
bool distinguisher_accepts(const Distinguisher& d, std::span<const TupleRecord> tuple);

// Scratch-carrying evaluator with the same semantics, for Monte Carlo loops:
// rebuilding group masks, f-tables and empirical views per call would
// dominate the runtime otherwise. Point values of the candidate predictor
// are fixed at construction (the stationary case p_i = p(x_i), which is the
// only way tuples arise in this project's loops).
class DistinguisherRunner {
 public:
  DistinguisherRunner(const Distinguisher& d, const Predictor& candidate);

  // Acceptance of one tuple drawn as (point, label) pairs.
  bool accepts_points(std::span<const SampleRecord> tuple);

  // Monte Carlo acceptance rate over tuples with points from `marginal` and
  // labels Bernoulli(label_prob[x]). Deterministic given the rng state.
  double acceptance_rate(const Distribution& marginal,
                         const std::vector<double>& label_prob, std::int64_t trials,
                         Rng& rng);

 private:
  const Distinguisher& d_;
  std::vector<double> f_values_;  // f(x, p(x)) per domain point
  std::vector<double> h_values_;
  std::vector<std::uint8_t> in_group_;
  EmpiricalAccumulator acc_;
};

// Two-world acceptance estimate for one distinguisher: the real world labels
// by D, the modeled world labels by the candidate p.
struct GapEstimate {
  double p_real = 0.0;
  double p_model = 0.0;
  double gap = 0.0;
  std::int64_t trials = 0;
};

GapEstimate acceptance_gap(const Distinguisher& d, const Distribution& D,
                           const Predictor& p, std::int64_t trials,
                           std::uint64_t seed);

// Trials per distinguisher so that all |true gap - estimate| <= tau/4 hold
// together with probability 1 - delta_audit.
std::int64_t audit_trials(std::size_t family_size, double tau, double delta_audit);

struct OIRow {
  std::string name;
  std::string group;
  std::string hypothesis;
  double p_hat_real = 0.0;
  double p_hat_model = 0.0;
  double gap = 0.0;
  std::int64_t trials = 0;
  bool pass = false;
};

struct OIReport {
  std::vector<OIRow> rows;
  std::int64_t trials = 0;
  double tau = 0.0;
  double max_gap = 0.0;
  bool all_pass = false;
};

// Estimate every distinguisher's acceptance gap against candidate p and pass
// iff all estimates are <= tau/2. Seeds are split per distinguisher and
// world, so reports are reproducible and order-independent.
OIReport audit_oi(const Predictor& p, const std::vector<Distinguisher>& family,
                  const Distribution& D, double tau, double delta_audit,
                  std::uint64_t seed);

// Stream of labeled draws for the learner: either simulation from a known
// distribution or replay of a fixed record pool. Consumption is counted
// either way; a pool that runs dry throws BudgetExhausted.
class SampleSource {
 public:
  static SampleSource simulation(Distribution d);
  static SampleSource pool(Domain domain, Sample records);

  SampleRecord draw(Rng& rng);
  std::uint64_t consumed() const { return consumed_; }
  const Domain& domain() const { return domain_; }
  // Null for pool sources.
  const Distribution* distribution() const { return dist_ ? &*dist_ : nullptr; }

 private:
  SampleSource() = default;

  Domain domain_;
  std::optional<Distribution> dist_;
  Sample pool_;
  std::size_t pool_next_ = 0;
  std::uint64_t consumed_ = 0;
};

struct OILearnOptions {
  // Budget = ceil(budget_constant * k * ln(max(F,2)/eta) / tau^4) draws.
  double budget_constant = 64.0;
  // Tabular path applies while the observed support stays this small.
  std::uint64_t tabular_support_limit = 100000;
  // Per-point observation target floor for the tabular path.
  std::int64_t min_count = 50;
  int max_boost_rounds = 40;
  // Skip the tabular path and run audit-and-update rounds regardless.
  bool force_boosting = false;
};

struct OILearnResult {
  Predictor p_tilde;
  std::uint64_t samples_consumed = 0;
  std::string path;  // "tabular" or "boosting"
  int rounds = 0;
  std::optional<OIReport> final_audit;  // boosting path only
};

// Learn a predictor indistinguishable from the source's labels against every
// distinguisher in the family, to slack tau with failure probability eta.
//
// Tabular path (finite observed support): draw until every observed point
// has at least max(min_count, ceil(2 ln(4F/eta) / tau^2)) observations or
// the cap is hit, then output per-point empirical label means (0.5 at
// unobserved points). Per-point concentration then bounds every
// distinguisher's acceptance gap by tau/2 with probability 1 - eta.
//
// Boosting path (forced, or support too large): repeat source-based audits
// at confidence eta/2 and correct the worst failing distinguisher's group by
// a bucketed mean shift. Throws BudgetExhausted naming the distinguishers
// still failing when the draw budget or round cap runs out.
OILearnResult learn_oi(SampleSource& source, const std::vector<Distinguisher>& family,
                       double tau, double eta, std::uint64_t seed,
                       const OILearnOptions& options = {});

}  // namespace multipac
