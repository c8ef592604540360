// Microbenchmarks for the hot paths: alias-table sampling, distinguisher
// trials (the inner loop of every audit), exact loss evaluation, and the
// brute-force oracle scan.

#include <benchmark/benchmark.h>

#include <vector>

#include "multipac/domain.hpp"
#include "multipac/instances.hpp"
#include "multipac/losses.hpp"
#include "multipac/oi.hpp"
#include "multipac/oracle.hpp"
#include "multipac/rng.hpp"

using namespace multipac;

namespace {

Instance random_bench_instance(const std::string& loss_kind) {
  RandomInstanceConfig cfg;
  cfg.n = 64;
  cfg.num_groups = 4;
  cfg.num_hypotheses = 4;
  cfg.loss_kind = loss_kind;
  cfg.seed = 17;
  return random_instance(cfg);
}

void BM_SamplePoint(benchmark::State& state) {
  Instance inst = random_bench_instance("squared");
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(inst.distribution.sample_point(rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SamplePoint);

void BM_DistinguisherTrial(benchmark::State& state) {
  Instance cf = group_conflict_instance();
  FProperTransform f = FProperTransform::derive(cf.loss);
  int k = static_cast<int>(state.range(0));
  Distinguisher d = make_distinguisher(cf.loss, f, cf.groups.items[0],
                                       cf.hypotheses.items[0], k, 0.05,
                                       cf.distribution.domain_size());
  Predictor truth = make_predictor("truth", cf.distribution.label_prob());
  DistinguisherRunner runner(d, truth);
  Rng rng(7);
  std::vector<SampleRecord> tuple(static_cast<std::size_t>(k));
  for (auto _ : state) {
    for (auto& r : tuple) r = cf.distribution.sample_record(rng);
    benchmark::DoNotOptimize(runner.accepts_points(tuple));
  }
  state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(BM_DistinguisherTrial)->Arg(64)->Arg(1024)->Arg(16384);

void BM_LossEvalSquared(benchmark::State& state) {
  Instance inst = random_bench_instance("squared");
  const Predictor& h = inst.hypotheses.items[0];
  for (auto _ : state) benchmark::DoNotOptimize(loss(inst.loss, inst.distribution, h));
}
BENCHMARK(BM_LossEvalSquared);

void BM_LossEvalCalibration(benchmark::State& state) {
  Instance inst = random_bench_instance("calibration");
  const Predictor& h = inst.hypotheses.items[0];
  for (auto _ : state) benchmark::DoNotOptimize(loss(inst.loss, inst.distribution, h));
}
BENCHMARK(BM_LossEvalCalibration);

void BM_OracleExhaustive(benchmark::State& state) {
  Instance cf = group_conflict_instance();
  Instance w = properness_witness_instance(cf.loss, cf.distribution, {});
  for (auto _ : state) {
    FeasibilityVerdict v = feasible_multipac(w.loss, w.distribution, w.groups,
                                             w.hypotheses, 0.05, 0.125,
                                             100000000ULL, true);
    benchmark::DoNotOptimize(v.minimax_slack);
  }
}
BENCHMARK(BM_OracleExhaustive);

void BM_OracleGridScan(benchmark::State& state) {
  // 5 grid values on an 8-point support: 390625 candidates per scan.
  RandomInstanceConfig cfg;
  cfg.n = 8;
  cfg.num_groups = 4;
  cfg.num_hypotheses = 4;
  cfg.seed = 17;
  Instance inst = random_instance(cfg);
  for (auto _ : state) {
    FeasibilityVerdict v = feasible_multipac(inst.loss, inst.distribution, inst.groups,
                                             inst.hypotheses, 1e-6, 0.25,
                                             100000000ULL, true);
    benchmark::DoNotOptimize(v.minimax_slack);
  }
}
BENCHMARK(BM_OracleGridScan);

}  // namespace

BENCHMARK_MAIN();
