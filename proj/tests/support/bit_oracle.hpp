#pragma once

// Independent reference for the narrow-float rounding path: works directly on
// the IEEE-754 bit fields of the double with integer guard/sticky rounding,
// sharing no code with the library's ldexp/floor implementation.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace oracle {

inline double quantize_bits(double x, int exp_bits, int sig_bits) {
  const uint64_t bits = std::bit_cast<uint64_t>(x);
  const bool negative = (bits >> 63) != 0;
  const int raw_exp = static_cast<int>((bits >> 52) & 0x7ff);
  const uint64_t frac = bits & ((1ull << 52) - 1);

  if (raw_exp == 0x7ff) return x;               // inf and NaN propagate
  if (raw_exp == 0 && frac == 0) return x;      // signed zero

  uint64_t m;
  int e_bias;  // value = m * 2^(e_bias)
  if (raw_exp == 0) {
    m = frac;
    e_bias = 1 - 1023 - 52;
  } else {
    m = frac | (1ull << 52);
    e_bias = raw_exp - 1023 - 52;
  }
  const int msb = 63 - std::countl_zero(m);
  const int e_val = e_bias + msb;  // floor(log2 |x|)

  const int emax = (1 << (exp_bits - 1)) - 1;
  const int emin = 1 - emax;
  const int q = std::max(e_val - sig_bits, emin - sig_bits);

  const int shift = e_bias - q;
  double mag;
  if (shift >= 0) {
    // Already an exact multiple of the quantum.
    mag = std::fabs(x);
  } else {
    const int s = -shift;
    uint64_t kept = 0, guard = 0;
    bool sticky = false;
    if (s >= 64) {
      kept = 0;
      if (s - 1 < 64) {
        guard = (m >> (s - 1)) & 1;
        sticky = (m & ((1ull << (s - 1)) - 1)) != 0;
      } else {
        guard = 0;
        sticky = m != 0;
      }
    } else {
      kept = m >> s;
      guard = (m >> (s - 1)) & 1;
      sticky = s >= 2 && (m & ((1ull << (s - 1)) - 1)) != 0;
    }
    if (guard && (sticky || (kept & 1))) kept += 1;
    mag = std::ldexp(static_cast<double>(kept), q);
  }

  const double max_finite = (2.0 - std::ldexp(1.0, -sig_bits)) * std::ldexp(1.0, emax);
  if (mag > max_finite) mag = std::numeric_limits<double>::infinity();
  return negative ? -mag : mag;
}

inline double quantize_fp16_bits(double x) { return quantize_bits(x, 5, 10); }
inline double quantize_bf16_bits(double x) { return quantize_bits(x, 8, 7); }

}  // namespace oracle
