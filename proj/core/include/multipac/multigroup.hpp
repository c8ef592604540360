#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multipac/domain.hpp"
#include "multipac/losses.hpp"
#include "multipac/oi.hpp"
#include "multipac/oracle.hpp"

namespace multipac {

// Resolved parameters of the reduction. The accuracy budget eps splits into
// the comparison margin (alpha) and the proper-transform slack, both eps/4;
// the confidence budget delta splits four ways (group undersampling, OI
// learner failure, audit confidence, uniform convergence), each delta/4.
struct Schedule {
  double eps = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double eps_prime = 0.0;
  double alpha = 0.0;
  double delta_prime = 0.0;
  double eta = 0.0;
  double tau = 0.0;
  std::uint64_t k_g = 0;  // per-group sample need: uc bound at (eps', delta', |H|+1)
  std::uint64_t k = 0;    // tuple arity: ceil(10 * (1/gamma) * ln(1/delta') * k_g)
  std::string rng_algorithm = kRngAlgorithmId;
};

Schedule schedule_params(const LossFunction& L, double eps, double delta, double gamma,
                         std::size_t num_hypotheses);

// One distinguisher per (group, hypothesis) pair at the schedule's k and
// alpha. Throws TooLarge if k does not fit the tuple machinery.
std::vector<Distinguisher> build_family(const LossFunction& L, const FProperTransform& f,
                                        const GroupCollection& G,
                                        const HypothesisCollection& H,
                                        const Schedule& schedule, int domain_size);

struct MultiGroupResult {
  Schedule schedule;
  Predictor p_tilde;   // learned real-valued predictor
  Predictor h_final;   // proper transform of p_tilde; the returned classifier
  std::uint64_t samples_consumed = 0;
  std::string learner_path;
  int learner_rounds = 0;
  // Present when the source exposes its distribution: the exact slack audit
  // of h_final, group by group.
  std::optional<SlackTable> slack;
  bool pass = false;
};

// The full reduction: derive the schedule, build the distinguisher family,
// learn an indistinguishable predictor from the source, and post-process it
// with the proper transform. Propagates NoUniformConvergence for losses
// without a UC bound and BudgetExhausted (with the failing distinguishers as
// an incompatibility witness) when the learner gives up.
MultiGroupResult multigroup_learn(const LossFunction& L, SampleSource& source,
                                  const GroupCollection& G,
                                  const HypothesisCollection& H, double eps,
                                  double delta, double gamma, std::uint64_t seed,
                                  const OILearnOptions& options = {});

// Monte Carlo check of empirical-loss concentration: reps draws of an
// m-sample, each scored by sup over H of |L_S(h) - L_D(h)|.
struct UcSummary {
  int m = 0;
  int reps = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max_dev = 0.0;
  // Fraction of reps whose deviation is exactly 1: the signature of the
  // empty-conditional failure mode.
  double frac_dev_eq_1 = 0.0;
};

UcSummary uc_estimate(const LossFunction& L, const Distribution& D,
                      const HypothesisCollection& H, int m, int reps,
                      std::uint64_t seed);

}  // namespace multipac
