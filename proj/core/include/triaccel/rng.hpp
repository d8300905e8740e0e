#pragma once

#include <cstdint>
#include <vector>

namespace triaccel {

// splitmix64: tiny, fast, and fully specified, so streams are bit-identical
// on every platform (std:: distributions are not).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, bound). bound must be > 0.
  uint64_t uniform_below(uint64_t bound);
  // Standard normal via Box-Muller (two uniforms per pair, one cached).
  double normal();

  std::vector<double> normal_vector(size_t n);

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stable seed derivation for independent substreams.
uint64_t mix_seed(uint64_t seed, uint64_t salt);
uint64_t mix_seed(uint64_t seed, uint64_t salt_a, uint64_t salt_b);

}  // namespace triaccel
