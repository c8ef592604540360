#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "multipac/domain.hpp"

namespace multipac {

enum class LossKind { decomposable, calibration, if_plus_decomposable, error_rates };
enum class PerExampleLoss { zero_one, squared };

const char* to_string(LossKind kind);
const char* to_string(PerExampleLoss ell);

// Finite pseudo-metric over domain points, stored as a dense symmetric
// matrix with zero diagonal. Only d(x, x') == 0 is ever consulted by the
// individual-fairness term, but the full matrix is kept for serialization.
class Metric {
 public:
  static Metric make(int n, std::vector<double> entries);  // row-major n*n

  double at(int i, int j) const {
    return entries_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                    static_cast<std::size_t>(j)];
  }
  bool zero(int i, int j) const { return at(i, j) == 0.0; }
  int size() const { return n_; }
  const std::vector<double>& entries() const { return entries_; }

 private:
  int n_ = 0;
  std::vector<double> entries_;
};

// Side-channel for evaluation conventions that silently changed the result.
struct LossFlags {
  // An error-rate conditional had an empty condition and was taken as 0.
  bool empty_conditional = false;
};

// A loss function L(D, h) -> [0, 1] over (finite labeled distribution,
// predictor) pairs. Four registered kinds:
//
//   decomposable            E_(x,y) [ ell(h(x), y) ]
//   calibration             sum_b Pr[bucket b] * |E[y | b] - E[h | b]|,
//                           buckets of h-values with width lambda
//   if_plus_decomposable    a * IF(h) + b * E[ell], binary h only, where
//                           IF(h) = Pr_{x,x'} [ h(x) != h(x') and d(x,x') = 0 ]
//   error_rates             a * Pr[h=1 | y=0] + b * Pr[h=0 | y=1], binary h
//                           only; an empty condition contributes 0 (flagged)
class LossFunction {
 public:
  static LossFunction decomposable(PerExampleLoss ell);
  static LossFunction calibration(double lambda = 0.1);
  static LossFunction if_plus_decomposable(double a, double b, Metric metric,
                                           PerExampleLoss ell = PerExampleLoss::zero_one);
  static LossFunction error_rates(double a, double b);

  LossKind kind() const { return kind_; }
  PerExampleLoss ell() const { return ell_; }
  double weight_a() const { return a_; }
  double weight_b() const { return b_; }
  double lambda() const { return lambda_; }
  const Metric* metric() const { return metric_.get(); }

  // Kinds that are only defined for {0,1}-valued classifiers.
  bool binary_only() const {
    return kind_ == LossKind::if_plus_decomposable || kind_ == LossKind::error_rates;
  }

  // Evaluate over a distribution view; `values` is indexed by domain point.
  // Throws NonBinaryPredictor for binary-only kinds. The view must be
  // nonempty.
  double evaluate(const DistView& view, const double* values,
                  LossFlags* flags = nullptr) const;

  // Singleton-distribution loss of predicting v at a point with label
  // probability z (no point identity needed: the pair term vanishes on
  // singletons).
  double singleton(double v, double z, LossFlags* flags = nullptr) const;

  // Uniform-convergence sample bound m(eps, delta, k) such that m i.i.d.
  // draws suffice for sup over k fixed predictors of |L_S - L_D| <= eps with
  // probability 1 - delta. Throws NoUniformConvergence for error_rates.
  std::uint64_t uc_sample_bound(double eps, double delta, std::uint64_t k) const;

  // Canonical one-line text form, e.g. "decomposable ell=squared". The
  // metric, if any, is serialized separately.
  std::string describe() const;

  // Multiplicative constant in the calibration UC bound.
  double calibration_uc_constant() const { return cal_uc_constant_; }

 private:
  LossKind kind_ = LossKind::decomposable;
  PerExampleLoss ell_ = PerExampleLoss::zero_one;
  double a_ = 0.0, b_ = 0.0;
  double lambda_ = 0.1;
  double cal_uc_constant_ = 8.0;
  std::shared_ptr<const Metric> metric_;
};

// Population loss. Throws InvalidArgument on size mismatch.
double loss(const LossFunction& L, const Distribution& D, const Predictor& h,
            LossFlags* flags = nullptr);

// Plug-in loss on the empirical distribution of a sample. Throws EmptySample.
double empirical_loss(const LossFunction& L, const Domain& domain, const Sample& S,
                      const Predictor& h, LossFlags* flags = nullptr);

// Minimizer analysis of v -> L(D_{x,z}, v) over a value grid. Candidates are
// {0, r, 2r, ..., 1} in general and {0, 1} for binary-only kinds. Minimizers
// are the candidates within 1e-9 of the minimum; "unique" means the
// minimizer set has diameter <= 2r.
struct UnambiguityReport {
  bool unique = false;
  double min_value = 0.0;
  std::vector<double> minimizers;
  // The minimizer set depends on the empty-conditional convention (degenerate
  // z for error rates); reported non-unique.
  bool degenerate = false;
};

UnambiguityReport check_unambiguity(const LossFunction& L, double z,
                                    double grid_r = 1.0 / 64);

// The pointwise-optimal prediction f(z) = argmin_v L(D_{x,z}, v), resolved by
// grid search plus bisection refinement to r/16 for smooth kinds. Throws
// Ambiguous when check_unambiguity fails.
double derive_f(const LossFunction& L, double z, double grid_r = 1.0 / 64);

// Total, deterministic resolver x, z -> f(x, z) used to post-process learned
// predictors. Built-in losses ignore the point. Squared and 0-1 losses use
// closed forms (z, and the 0.5 threshold); everything else resolves through
// derive_f with ties broken toward the smallest minimizer so the transform
// stays total.
class FProperTransform {
 public:
  static FProperTransform derive(const LossFunction& L, double grid_r = 1.0 / 64);

  double operator()(int point, double z) const;

  // Pointwise f(x, p(x)) over a whole predictor.
  Predictor compose(const Predictor& p, const std::string& name = "") const;

 private:
  LossKind kind_ = LossKind::decomposable;
  PerExampleLoss ell_ = PerExampleLoss::zero_one;
  std::shared_ptr<const LossFunction> loss_;  // for grid resolution
  double grid_r_ = 1.0 / 64;
};

}  // namespace multipac
