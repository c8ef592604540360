#include "multipac/oi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multipac/errors.hpp"
#include "multipac/text.hpp"

namespace multipac {

Distinguisher make_distinguisher(const LossFunction& L, const FProperTransform& f,
                                 const Group& g, const Predictor& h, int k,
                                 double alpha, int domain_size) {
  if (k < 1) throw InvalidArgument("distinguisher: k must be >= 1");
  if (!(alpha >= 0.0)) throw InvalidArgument("distinguisher: alpha must be >= 0");
  if (static_cast<int>(h.values.size()) != domain_size)
    throw InvalidArgument("distinguisher: hypothesis size != domain size");
  Group checked = make_group(g.name, g.members, domain_size);
  std::string name = "g=" + g.name + "|h=" + h.name + "|k=" + std::to_string(k) +
                     "|alpha=" + format_g17(alpha);
  return Distinguisher{std::move(name), g.name,  h.name, L, f,
                       std::move(checked), h, k, alpha};
}

namespace {

// Shared decision rule: empirical losses of the plug-in predictor versus the
// reference hypothesis on the group sub-sample.
inline bool decide(const Distinguisher& d, EmpiricalAccumulator& acc,
                   const double* f_values, const double* h_values) {
  if (acc.empty()) return true;  // no group points seen: vacuous accept
  DistView view = acc.view();
  double lf = d.loss.evaluate(view, f_values);
  double lh = d.loss.evaluate(view, h_values);
  return lf < lh + 2.0 * d.alpha;
}

}  // namespace

bool distinguisher_accepts(const Distinguisher& d, std::span<const TupleRecord> tuple) {
  if (static_cast<int>(tuple.size()) != d.k)
    throw WrongArity("distinguisher expects k = " + std::to_string(d.k) +
                     ", got a tuple of " + std::to_string(tuple.size()));
  const auto n = d.hypothesis.values.size();

  std::vector<double> f_values(n, 0.0);  // off-tuple points predict 0
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::uint8_t> in_group(n, 0);
  for (int x : d.group.members) in_group[static_cast<std::size_t>(x)] = 1;

  EmpiricalAccumulator acc(static_cast<int>(n));
  for (const TupleRecord& r : tuple) {
    if (r.point < 0 || r.point >= static_cast<int>(n))
      throw InvalidArgument("distinguisher: tuple point out of range");
    if (r.label != 0 && r.label != 1)
      throw InvalidArgument("distinguisher: tuple label must be 0 or 1");
    if (!(r.p >= 0.0 && r.p <= 1.0))
      throw InvalidArgument("distinguisher: tuple prediction outside [0,1]");
    auto x = static_cast<std::size_t>(r.point);
    if (!seen[x]) {  // first occurrence wins when p values conflict
      seen[x] = 1;
      f_values[x] = d.f(r.point, r.p);
    }
    if (in_group[x]) acc.add(r.point, r.label);
  }
  return decide(d, acc, f_values.data(), d.hypothesis.values.data());
}

DistinguisherRunner::DistinguisherRunner(const Distinguisher& d, const Predictor& candidate)
    : d_(d),
      h_values_(d.hypothesis.values),
      in_group_(d.hypothesis.values.size(), 0),
      acc_(static_cast<int>(d.hypothesis.values.size())) {
  const auto n = d.hypothesis.values.size();
  if (candidate.values.size() != n)
    throw InvalidArgument("distinguisher runner: candidate size != domain size");
  f_values_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    if (!(candidate.values[x] >= 0.0 && candidate.values[x] <= 1.0))
      throw InvalidArgument("distinguisher runner: candidate value outside [0,1]");
    f_values_[x] = d.f(static_cast<int>(x), candidate.values[x]);
  }
  for (int x : d.group.members) in_group_[static_cast<std::size_t>(x)] = 1;
}

bool DistinguisherRunner::accepts_points(std::span<const SampleRecord> tuple) {
  if (static_cast<int>(tuple.size()) != d_.k)
    throw WrongArity("distinguisher expects k = " + std::to_string(d_.k) +
                     ", got a tuple of " + std::to_string(tuple.size()));
  acc_.reset();
  for (const SampleRecord& r : tuple)
    if (in_group_[static_cast<std::size_t>(r.point)]) acc_.add(r.point, r.label);
  return decide(d_, acc_, f_values_.data(), h_values_.data());
}

double DistinguisherRunner::acceptance_rate(const Distribution& marginal,
                                            const std::vector<double>& label_prob,
                                            std::int64_t trials, Rng& rng) {
  if (trials < 1) throw InvalidArgument("acceptance_rate: trials must be >= 1");
  if (label_prob.size() != f_values_.size())
    throw InvalidArgument("acceptance_rate: label table size != domain size");
  const int k = d_.k;
  std::int64_t accepted = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    acc_.reset();
    for (int i = 0; i < k; ++i) {
      int x = marginal.sample_point(rng);
      // Labels of points outside the group never reach the decision, so the
      // Bernoulli draw is skipped for them.
      if (in_group_[static_cast<std::size_t>(x)])
        acc_.add(x, rng.bernoulli(label_prob[static_cast<std::size_t>(x)]) ? 1 : 0);
    }
    if (decide(d_, acc_, f_values_.data(), h_values_.data())) ++accepted;
  }
  return static_cast<double>(accepted) / static_cast<double>(trials);
}

GapEstimate acceptance_gap(const Distinguisher& d, const Distribution& D,
                           const Predictor& p, std::int64_t trials,
                           std::uint64_t seed) {
  DistinguisherRunner runner(d, p);
  Rng real_rng(derive_seed(seed, 1));
  Rng model_rng(derive_seed(seed, 2));
  GapEstimate est;
  est.trials = trials;
  est.p_real = runner.acceptance_rate(D, D.label_prob(), trials, real_rng);
  est.p_model = runner.acceptance_rate(D, p.values, trials, model_rng);
  est.gap = std::abs(est.p_real - est.p_model);
  return est;
}

std::int64_t audit_trials(std::size_t family_size, double tau, double delta_audit) {
  if (family_size == 0) throw InvalidArgument("audit: empty family");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("audit: tau outside (0,1)");
  if (!(delta_audit > 0.0 && delta_audit < 1.0))
    throw InvalidArgument("audit: delta outside (0,1)");
  long double m = 8.0L * std::log(4.0L * static_cast<long double>(family_size) /
                                  delta_audit) /
                  (static_cast<long double>(tau) * tau);
  return static_cast<std::int64_t>(std::ceil(m));
}

OIReport audit_oi(const Predictor& p, const std::vector<Distinguisher>& family,
                  const Distribution& D, double tau, double delta_audit,
                  std::uint64_t seed) {
  OIReport report;
  report.tau = tau;
  report.trials = audit_trials(family.size(), tau, delta_audit);
  report.all_pass = true;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Distinguisher& d = family[i];
    GapEstimate est = acceptance_gap(d, D, p, report.trials, derive_seed(seed, i));
    OIRow row{d.name,     d.group_name, d.hypothesis_name, est.p_real,
              est.p_model, est.gap,     est.trials,        est.gap <= tau / 2 + 1e-12};
    report.max_gap = std::max(report.max_gap, row.gap);
    report.all_pass = report.all_pass && row.pass;
    report.rows.push_back(std::move(row));
  }
  return report;
}

SampleSource SampleSource::simulation(Distribution d) {
  SampleSource s;
  s.domain_ = d.domain();
  s.dist_ = std::move(d);
  return s;
}

SampleSource SampleSource::pool(Domain domain, Sample records) {
  for (const auto& r : records.records) {
    if (r.point < 0 || r.point >= domain.size())
      throw InvalidArgument("sample pool: point index out of range");
    if (r.label != 0 && r.label != 1)
      throw InvalidArgument("sample pool: label must be 0 or 1");
  }
  SampleSource s;
  s.domain_ = std::move(domain);
  s.pool_ = std::move(records);
  return s;
}

SampleRecord SampleSource::draw(Rng& rng) {
  ++consumed_;
  if (dist_) return dist_->sample_record(rng);
  if (pool_next_ >= pool_.records.size())
    throw BudgetExhausted("sample pool exhausted after " +
                              std::to_string(pool_.records.size()) + " records",
                          {});
  return pool_.records[pool_next_++];
}

namespace {

std::uint64_t learn_budget(double budget_constant, int kbar, std::size_t family_size,
                           double eta, double tau) {
  long double f = static_cast<long double>(std::max<std::size_t>(family_size, 2));
  long double b = static_cast<long double>(budget_constant) * kbar *
                  std::log(f / eta) /
                  (static_cast<long double>(tau) * tau * tau * tau);
  b = std::ceil(b);
  if (!(b >= 0.0L)) throw InvalidArgument("learn_oi: nonpositive budget");
  if (b > 9.0e18L) return static_cast<std::uint64_t>(9.0e18L);
  return static_cast<std::uint64_t>(b);
}

std::vector<std::string> names_of(const std::vector<Distinguisher>& family,
                                  const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(family[i].name);
  return out;
}

}  // namespace

OILearnResult learn_oi(SampleSource& source, const std::vector<Distinguisher>& family,
                       double tau, double eta, std::uint64_t seed,
                       const OILearnOptions& options) {
  if (family.empty()) throw InvalidArgument("learn_oi: empty distinguisher family");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("learn_oi: tau outside (0,1)");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("learn_oi: eta outside (0,1)");

  const int n = source.domain().size();
  int kbar = 0;
  for (const auto& d : family) {
    kbar = std::max(kbar, d.k);
    if (static_cast<int>(d.hypothesis.values.size()) != n)
      throw InvalidArgument("learn_oi: family and source domains disagree");
  }

  const std::uint64_t budget =
      learn_budget(options.budget_constant, kbar, family.size(), eta, tau);
  const std::uint64_t start = source.consumed();
  auto used = [&] { return source.consumed() - start; };

  Rng rng(derive_seed(seed, 0x6f696c6561726eULL));  // one stream for the whole learner

  std::vector<std::int64_t> count(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> ones(static_cast<std::size_t>(n), 0);
  auto draw_into_counts = [&](std::uint64_t m) {
    for (std::uint64_t i = 0; i < m; ++i) {
      SampleRecord r = source.draw(rng);
      ++count[static_cast<std::size_t>(r.point)];
      ones[static_cast<std::size_t>(r.point)] += r.label;
    }
  };

  const std::int64_t target =
      std::max<std::int64_t>(options.min_count,
                             static_cast<std::int64_t>(std::ceil(
                                 2.0 * std::log(4.0 * static_cast<double>(family.size()) / eta) /
                                 (tau * tau))));

  const std::uint64_t phase1 =
      std::min<std::uint64_t>(budget, std::max<std::uint64_t>(4ULL * static_cast<std::uint64_t>(kbar), 20000));
  draw_into_counts(phase1);

  auto make_p_tilde = [&] {
    std::vector<double> values(static_cast<std::size_t>(n), 0.5);
    for (std::size_t x = 0; x < values.size(); ++x)
      if (count[x] > 0)
        values[x] = static_cast<double>(ones[x]) / static_cast<double>(count[x]);
    return make_predictor("p_tilde", std::move(values));
  };

  if (!options.force_boosting) {
    // Top up until every observed point has `target` observations, within a
    // hard cap so vanishing-mass points cannot stall the learner.
    const std::uint64_t cap = std::min(budget, 8 * std::max<std::uint64_t>(phase1, 1));
    for (;;) {
      std::int64_t min_count = std::numeric_limits<std::int64_t>::max();
      std::uint64_t observed = 0;
      for (std::size_t x = 0; x < count.size(); ++x)
        if (count[x] > 0) {
          ++observed;
          min_count = std::min(min_count, count[x]);
        }
      if (observed > 0 && min_count >= target) break;
      if (used() >= cap) break;
      draw_into_counts(std::min<std::uint64_t>(4096, cap - used()));
    }
    std::uint64_t observed = 0;
    for (auto c : count)
      if (c > 0) ++observed;
    if (observed <= options.tabular_support_limit)
      return OILearnResult{make_p_tilde(), used(), "tabular", 0, std::nullopt};
  }

  // Audit-and-update rounds. p starts from the phase-1 empirical means.
  Predictor p = make_p_tilde();
  const std::int64_t trials = audit_trials(family.size(), tau, eta / 2);
  std::vector<std::size_t> all(family.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<std::size_t> failing = all;  // best knowledge before any audit

  std::vector<SampleRecord> tuple(static_cast<std::size_t>(kbar));
  const int buckets = 10;
  auto bucket_of = [&](double v) {
    int b = static_cast<int>(v * buckets);
    return std::min(b, buckets - 1);
  };

  for (int round = 1; round <= options.max_boost_rounds; ++round) {
    const std::uint64_t audit_cost = 2ULL * family.size() *
                                     static_cast<std::uint64_t>(trials) *
                                     static_cast<std::uint64_t>(kbar);
    if (used() + audit_cost > budget)
      throw BudgetExhausted(
          "learn_oi: budget of " + std::to_string(budget) +
              " draws cannot fund audit round " + std::to_string(round),
          names_of(family, failing));

    OIReport report;
    report.tau = tau;
    report.trials = trials;
    report.all_pass = true;
    failing.clear();
    for (std::size_t i = 0; i < family.size(); ++i) {
      const Distinguisher& d = family[i];
      DistinguisherRunner runner(d, p);
      std::int64_t acc_real = 0, acc_model = 0;
      for (std::int64_t t = 0; t < trials; ++t) {
        for (int j = 0; j < d.k; ++j) tuple[static_cast<std::size_t>(j)] = source.draw(rng);
        if (runner.accepts_points({tuple.data(), static_cast<std::size_t>(d.k)}))
          ++acc_real;
      }
      for (std::int64_t t = 0; t < trials; ++t) {
        for (int j = 0; j < d.k; ++j) {
          SampleRecord r = source.draw(rng);
          r.label = rng.bernoulli(p.values[static_cast<std::size_t>(r.point)]) ? 1 : 0;
          tuple[static_cast<std::size_t>(j)] = r;
        }
        if (runner.accepts_points({tuple.data(), static_cast<std::size_t>(d.k)}))
          ++acc_model;
      }
      OIRow row;
      row.name = d.name;
      row.group = d.group_name;
      row.hypothesis = d.hypothesis_name;
      row.p_hat_real = static_cast<double>(acc_real) / static_cast<double>(trials);
      row.p_hat_model = static_cast<double>(acc_model) / static_cast<double>(trials);
      row.gap = std::abs(row.p_hat_real - row.p_hat_model);
      row.trials = trials;
      row.pass = row.gap <= tau / 2 + 1e-12;
      if (!row.pass) failing.push_back(i);
      report.max_gap = std::max(report.max_gap, row.gap);
      report.all_pass = report.all_pass && row.pass;
      report.rows.push_back(std::move(row));
    }
    if (failing.empty())
      return OILearnResult{std::move(p), used(), "boosting", round, std::move(report)};

    // Correct the worst offender: shift each prediction-level bucket of its
    // group by the observed bucket residual.
    std::size_t worst = failing.front();
    for (std::size_t i : failing)
      if (report.rows[i].gap > report.rows[worst].gap) worst = i;
    const Group& g = family[worst].group;
    std::vector<std::uint8_t> in_group(static_cast<std::size_t>(n), 0);
    for (int x : g.members) in_group[static_cast<std::size_t>(x)] = 1;

    const std::uint64_t update_draws =
        std::max<std::uint64_t>(static_cast<std::uint64_t>(kbar), 2000);
    if (used() + update_draws > budget)
      throw BudgetExhausted("learn_oi: budget exhausted before update round " +
                                std::to_string(round),
                            names_of(family, failing));
    std::vector<double> sum_y(buckets, 0.0), sum_p(buckets, 0.0);
    std::vector<std::int64_t> cnt(buckets, 0);
    for (std::uint64_t i = 0; i < update_draws; ++i) {
      SampleRecord r = source.draw(rng);
      if (!in_group[static_cast<std::size_t>(r.point)]) continue;
      int b = bucket_of(p.values[static_cast<std::size_t>(r.point)]);
      sum_y[static_cast<std::size_t>(b)] += r.label;
      sum_p[static_cast<std::size_t>(b)] += p.values[static_cast<std::size_t>(r.point)];
      ++cnt[static_cast<std::size_t>(b)];
    }
    for (int x : g.members) {
      auto xi = static_cast<std::size_t>(x);
      int b = bucket_of(p.values[xi]);
      auto bi = static_cast<std::size_t>(b);
      if (cnt[bi] == 0) continue;
      double delta = (sum_y[bi] - sum_p[bi]) / static_cast<double>(cnt[bi]);
      p.values[xi] = std::clamp(p.values[xi] + delta, 0.0, 1.0);
    }
  }
  throw BudgetExhausted("learn_oi: audits still failing after " +
                            std::to_string(options.max_boost_rounds) + " rounds",
                        names_of(family, failing));
}

}  // namespace multipac
