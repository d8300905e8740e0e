#include "triaccel/rng.hpp"

#include <cmath>

#include "triaccel/errors.hpp"

namespace triaccel {

uint64_t Rng::next_u64() {
  uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_below(uint64_t bound) {
  if (bound == 0) throw ConfigError("uniform_below: bound must be positive");
  // Rejection sampling to kill modulo bias.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::vector<double> Rng::normal_vector(size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = normal();
  return out;
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  Rng r(seed ^ (salt * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
  return r.next_u64();
}

uint64_t mix_seed(uint64_t seed, uint64_t salt_a, uint64_t salt_b) {
  return mix_seed(mix_seed(seed, salt_a), salt_b);
}

}  // namespace triaccel
