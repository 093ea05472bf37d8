#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace p300 {

// Seed derivation contract.
//
// Every experiment is driven by one 64-bit master seed. Each consumer asks for
// its own stream with derive_seed(master, purpose, index): the purpose string
// is hashed with 64-bit FNV-1a, folded into the master seed, and the result is
// passed twice through the SplitMix64 finalizer together with the index.
// Streams for distinct (purpose, index) pairs are therefore statistically
// independent and do not depend on the order in which they are requested.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose,
                          std::uint64_t index = 0);

// Deterministic generator. Only the engine's raw 64-bit output is used; the
// real/normal/integer mappings are implemented here so sequences are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (the spare value is cached).
  double normal();

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace p300
