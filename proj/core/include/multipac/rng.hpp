#pragma once

#include <cstdint>
#include <vector>

namespace multipac {

// Algorithm identifier recorded in run records so results can be tied to the
// exact generator that produced them.
inline constexpr const char* kRngAlgorithmId = "xoshiro256ss-splitmix64-v1";

// splitmix64 step; used to expand seeds and to derive child stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministically derive a child seed from a root seed and a stream tag.
// Derivation is a pure function, so independent consumers (one per
// distinguisher, per world, per rerun index) can be seeded without sharing
// generator state.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b);

// xoshiro256** with splitmix64 seeding. Small, fast, and fully specified
// here, so every Monte Carlo figure in the project is bit-reproducible from
// (seed, algorithm id) alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Child generator for an independent logical stream.
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

// Vose alias table over an explicit probability vector. Built once, then
// sampling is O(1) per draw with a single uniform variate.
class AliasTable {
 public:
  // `weights` need not be normalized; they must be nonnegative with a
  // positive sum. Entries with zero weight are never drawn.
  explicit AliasTable(const std::vector<double>& weights);

  int sample(Rng& rng) const {
    double u = rng.next_double() * static_cast<double>(prob_.size());
    auto idx = static_cast<std::size_t>(u);
    if (idx >= prob_.size()) idx = prob_.size() - 1;  // guard u == n from rounding
    return (u - static_cast<double>(idx)) < prob_[idx] ? static_cast<int>(idx)
                                                       : alias_[idx];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

}  // namespace multipac
