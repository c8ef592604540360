#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "multipac/rng.hpp"

namespace multipac {

// Finite universe of points. Points are referenced everywhere by index;
// names exist for serialization and reports. Payloads are optional carried
// data (real vectors) that metric-based losses may have been built from; the
// library itself never interprets them.
struct Domain {
  std::vector<std::string> point_names;
  std::vector<std::vector<double>> payloads;  // empty, or one vector per point

  int size() const { return static_cast<int>(point_names.size()); }
};

// Validates names: nonempty, whitespace-free, unique; payloads empty or n.
Domain make_domain(std::vector<std::string> point_names,
                   std::vector<std::vector<double>> payloads = {});

// Subset of the domain, stored as strictly increasing point indices.
struct Group {
  std::string name;
  std::vector<int> members;
};

struct GroupCollection {
  std::vector<Group> items;

  std::size_t size() const { return items.size(); }
};

// Validates: indices in [0, n), strictly increasing, nonempty, unique names.
Group make_group(std::string name, std::vector<int> members, int domain_size);
GroupCollection make_group_collection(std::vector<Group> groups, int domain_size);

// Real-valued predictor tabulated over the whole domain, values in [0, 1].
struct Predictor {
  std::string name;
  std::vector<double> values;

  double operator()(int point) const { return values[static_cast<std::size_t>(point)]; }
  bool is_binary() const;
};

Predictor make_predictor(std::string name, std::vector<double> values);

struct HypothesisCollection {
  std::vector<Predictor> items;

  std::size_t size() const { return items.size(); }
};

// Validates: nonempty, all sized to the domain, unique names.
HypothesisCollection make_hypothesis_collection(std::vector<Predictor> hypotheses,
                                                int domain_size);

struct SampleRecord {
  int point;
  int label;  // 0 or 1
};

struct Sample {
  std::vector<SampleRecord> records;

  std::size_t size() const { return records.size(); }
};

// Read-only columnar view of a labeled distribution restricted to its
// support: parallel arrays of point index, positive mass, and conditional
// label expectation. Both exact distributions and empirical samples reduce
// to this shape, so every loss evaluation in the project funnels through one
// evaluator.
struct DistView {
  std::span<const int> point;
  std::span<const double> mass;  // strictly positive, sums to ~1
  std::span<const double> z;     // E[y | x], in [0, 1]

  std::size_t size() const { return point.size(); }
};

// Finite labeled distribution: point masses plus per-point label
// probabilities z(x) = Pr[y = 1 | x]. Immutable after construction.
class Distribution {
 public:
  // `mass` must be nonnegative and sum to 1 within 1e-9, and is stored
  // verbatim; `label_prob` must lie in [0, 1]. Throws InvalidArgument.
  static Distribution make(Domain domain, std::vector<double> mass,
                           std::vector<double> label_prob);

  const Domain& domain() const { return domain_; }
  int domain_size() const { return domain_.size(); }
  const std::vector<double>& mass() const { return mass_; }
  const std::vector<double>& label_prob() const { return label_prob_; }
  const std::vector<int>& support() const { return support_; }

  DistView view() const {
    return DistView{support_, support_mass_, support_z_};
  }

  double group_mass(const Group& g) const;

  // Conditional distribution given the group: mass zero off g, renormalized
  // on g. Throws InvalidArgument when the group has zero mass.
  Distribution restricted(const Group& g) const;

  // Same marginal over points, labels drawn from the predictor instead of
  // the true conditional: the "modeled world" of a candidate p.
  Distribution modeled(const Predictor& p) const;

  // One marginal point draw. O(1) via a prebuilt alias table.
  int sample_point(Rng& rng) const { return support_[static_cast<std::size_t>(alias_->sample(rng))]; }

  // One labeled draw: point from the marginal, label Bernoulli(z(point)).
  SampleRecord sample_record(Rng& rng) const {
    int x = sample_point(rng);
    return SampleRecord{x, rng.bernoulli(label_prob_[static_cast<std::size_t>(x)]) ? 1 : 0};
  }

  // m i.i.d. labeled draws, deterministic given the seed.
  Sample draw(int m, std::uint64_t seed) const;

 private:
  Domain domain_;
  std::vector<double> mass_;
  std::vector<double> label_prob_;
  std::vector<int> support_;
  std::vector<double> support_mass_;
  std::vector<double> support_z_;
  std::shared_ptr<const AliasTable> alias_;
};

// Reusable scratch for turning streams of labeled records into a DistView.
// reset() is O(points touched since the last reset), not O(domain), so tight
// Monte Carlo loops can rebuild empirical views millions of times.
class EmpiricalAccumulator {
 public:
  explicit EmpiricalAccumulator(int domain_size);

  void add(int point, int label) {
    auto p = static_cast<std::size_t>(point);
    if (count_[p] == 0) touched_.push_back(point);
    ++count_[p];
    ones_[p] += label;
  }

  void reset();

  std::int64_t total() const { return total_imp(); }
  bool empty() const { return touched_.empty(); }

  // Canonical (point-sorted) empirical view of everything added since the
  // last reset. Valid until the next add/reset call.
  DistView view();

 private:
  std::int64_t total_imp() const;

  std::vector<std::int64_t> count_;
  std::vector<std::int64_t> ones_;
  std::vector<int> touched_;
  std::vector<int> view_point_;
  std::vector<double> view_mass_;
  std::vector<double> view_z_;
};

// Empirical view of a whole sample against a given domain (one-shot helper;
// hot paths keep their own accumulator). Throws EmptySample.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution(const Domain& domain, const Sample& sample);
  DistView view() const { return DistView{point_, mass_, z_}; }

 private:
  std::vector<int> point_;
  std::vector<double> mass_;
  std::vector<double> z_;
};

}  // namespace multipac
