#include "multipac/multigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multipac/errors.hpp"

namespace multipac {

Schedule schedule_params(const LossFunction& L, double eps, double delta, double gamma,
                         std::size_t num_hypotheses) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("schedule: eps outside (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgument("schedule: delta outside (0,1)");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw InvalidArgument("schedule: gamma outside (0,1]");
  if (num_hypotheses == 0) throw InvalidArgument("schedule: no hypotheses");

  Schedule s;
  s.eps = eps;
  s.delta = delta;
  s.gamma = gamma;
  s.eps_prime = eps / 4;
  s.alpha = eps / 4;
  s.delta_prime = delta / 4;
  s.eta = delta / 4;
  s.tau = delta / 4;
  // The UC event must cover every hypothesis plus the plug-in predictor.
  s.k_g = L.uc_sample_bound(s.eps_prime, s.delta_prime, num_hypotheses + 1);
  long double k = std::ceil(10.0L / gamma * std::log(1.0L / s.delta_prime) *
                            static_cast<long double>(s.k_g));
  if (!(k < 9.0e18L)) throw TooLarge("schedule: tuple arity overflows");
  s.k = static_cast<std::uint64_t>(k);
  return s;
}

std::vector<Distinguisher> build_family(const LossFunction& L, const FProperTransform& f,
                                        const GroupCollection& G,
                                        const HypothesisCollection& H,
                                        const Schedule& schedule, int domain_size) {
  if (G.items.empty()) throw InvalidArgument("build_family: no groups");
  if (H.items.empty()) throw InvalidArgument("build_family: no hypotheses");
  if (schedule.k > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    throw TooLarge("build_family: k = " + std::to_string(schedule.k) +
                   " exceeds supported tuple arity");
  std::vector<Distinguisher> family;
  family.reserve(G.items.size() * H.items.size());
  for (const auto& g : G.items)
    for (const auto& h : H.items)
      family.push_back(make_distinguisher(L, f, g, h, static_cast<int>(schedule.k),
                                          schedule.alpha, domain_size));
  return family;
}

MultiGroupResult multigroup_learn(const LossFunction& L, SampleSource& source,
                                  const GroupCollection& G,
                                  const HypothesisCollection& H, double eps,
                                  double delta, double gamma, std::uint64_t seed,
                                  const OILearnOptions& options) {
  Schedule schedule = schedule_params(L, eps, delta, gamma, H.size());
  const int n = source.domain().size();
  for (const auto& h : H.items)
    if (static_cast<int>(h.values.size()) != n)
      throw InvalidArgument("multigroup_learn: hypothesis domain != source domain");

  if (const Distribution* D = source.distribution()) {
    for (const auto& g : G.items) {
      double m = D->group_mass(g);
      if (m < gamma - 1e-12)
        throw InvalidArgument("multigroup_learn: group '" + g.name + "' has mass " +
                              std::to_string(m) + " below the promised gamma");
    }
  }

  FProperTransform f = FProperTransform::derive(L);
  std::vector<Distinguisher> family = build_family(L, f, G, H, schedule, n);

  const std::uint64_t before = source.consumed();
  OILearnResult learned =
      learn_oi(source, family, schedule.tau, schedule.eta, derive_seed(seed, 1), options);

  MultiGroupResult out;
  out.schedule = schedule;
  out.p_tilde = std::move(learned.p_tilde);
  out.h_final = f.compose(out.p_tilde, "h_final");
  out.samples_consumed = source.consumed() - before;
  out.learner_path = learned.path;
  out.learner_rounds = learned.rounds;
  if (const Distribution* D = source.distribution()) {
    out.slack = verify_multipac(L, *D, G, H, eps, out.h_final);
    out.pass = out.slack->all_ok;
  }
  return out;
}

UcSummary uc_estimate(const LossFunction& L, const Distribution& D,
                      const HypothesisCollection& H, int m, int reps,
                      std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("uc_estimate: m must be >= 1");
  if (reps < 1) throw InvalidArgument("uc_estimate: reps must be >= 1");
  if (H.items.empty()) throw InvalidArgument("uc_estimate: no hypotheses");

  std::vector<double> true_loss;
  true_loss.reserve(H.items.size());
  for (const auto& h : H.items) true_loss.push_back(loss(L, D, h));

  Rng rng(seed);
  EmpiricalAccumulator acc(D.domain_size());
  std::vector<double> devs;
  devs.reserve(static_cast<std::size_t>(reps));
  for (int rep = 0; rep < reps; ++rep) {
    acc.reset();
    for (int i = 0; i < m; ++i) {
      SampleRecord r = D.sample_record(rng);
      acc.add(r.point, r.label);
    }
    DistView view = acc.view();
    double dev = 0.0;
    for (std::size_t hi = 0; hi < H.items.size(); ++hi) {
      double emp = L.evaluate(view, H.items[hi].values.data());
      dev = std::max(dev, std::abs(emp - true_loss[hi]));
    }
    devs.push_back(dev);
  }

  std::sort(devs.begin(), devs.end());
  auto quantile = [&](double q) {
    auto idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(reps))) ;
    if (idx > 0) --idx;
    return devs[std::min(idx, devs.size() - 1)];
  };
  UcSummary s;
  s.m = m;
  s.reps = reps;
  double total = 0.0;
  std::size_t ones = 0;
  for (double d : devs) {
    total += d;
    if (d >= 1.0 - 1e-12) ++ones;
  }
  s.mean = total / static_cast<double>(reps);
  s.p50 = quantile(0.50);
  s.p90 = quantile(0.90);
  s.p99 = quantile(0.99);
  s.max_dev = devs.back();
  s.frac_dev_eq_1 = static_cast<double>(ones) / static_cast<double>(reps);
  return s;
}

}  // namespace multipac
