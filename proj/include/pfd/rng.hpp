#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pfd {

/// SplitMix64 finalizer; used for seed mixing and derivation.
std::uint64_t mix64(std::uint64_t z);

/// Deterministic per-trial seed: chained mixes of the master seed with an
/// FNV-1a hash of the experiment id, the trial and the round. Changing one
/// component never perturbs streams derived from different components.
std::uint64_t derive_seed(std::uint64_t master, std::string_view experiment_id,
                          std::uint64_t trial, std::uint64_t round);

/// Seeded stream with explicit uniform/normal transforms, so output is
/// byte-identical for a given seed within one build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (polar form), one spare cached.
  double normal();

  /// +1 with probability d, else -1.
  double rademacher(double d) { return uniform() < d ? 1.0 : -1.0; }

  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pfd
