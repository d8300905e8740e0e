#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "support/bit_oracle.hpp"
#include "support/util.hpp"
#include "triaccel/errors.hpp"
#include "triaccel/precision.hpp"
#include "triaccel/rng.hpp"

using triaccel::PrecisionMode;
using triaccel::quantize;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double random_wide_value(triaccel::Rng& rng, int min_exp, int max_exp) {
  const double mantissa = 1.0 + rng.uniform();
  const int e = min_exp + static_cast<int>(rng.uniform_below(
                    static_cast<uint64_t>(max_exp - min_exp + 1)));
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return sign * std::ldexp(mantissa, e);
}

}  // namespace

TEST_CASE("fp32 mode is the identity") {
  const double cases[] = {0.0,     -0.0,   1.0,     -1.0,      1e308,
                          -1e308,  5e-324, -5e-324, 0.1,       -0.1,
                          65504.0, kInf,   -kInf,   1 + 1e-12, 3.5e38};
  for (double x : cases) {
    CHECK(oracle::same_bits(quantize(x, PrecisionMode::Fp32), x));
  }
  const double n = quantize(std::nan(""), PrecisionMode::Fp32);
  CHECK(std::isnan(n));
}

TEST_CASE("half-width rounding at known points") {
  // Tie halfway between 1.0 and the next half-precision value resolves to the
  // even mantissa, i.e. back to 1.0.
  CHECK(quantize(1.0 + 0x1p-11, PrecisionMode::Fp16) == 1.0);
  // One representable step above 1.0.
  CHECK(quantize(1.0 + 0x1p-10, PrecisionMode::Fp16) == 1.0 + 0x1p-10);
  // Tie at 1.5 ulp rounds up to the even neighbor 1 + 2^-9.
  CHECK(quantize(1.0 + 3 * 0x1p-11, PrecisionMode::Fp16) == 1.0 + 0x1p-9);
  // Just below / above a tie break the symmetry.
  CHECK(quantize(std::nextafter(1.0 + 0x1p-11, 0.0), PrecisionMode::Fp16) == 1.0);
  CHECK(quantize(std::nextafter(1.0 + 0x1p-11, 2.0), PrecisionMode::Fp16) == 1.0 + 0x1p-10);
}

TEST_CASE("half-width overflow boundary") {
  CHECK(quantize(65504.0, PrecisionMode::Fp16) == 65504.0);
  CHECK(quantize(65505.0, PrecisionMode::Fp16) == 65504.0);
  // Largest ulp below the boundary is 32; the midpoint to the (absent) next
  // value sits at 65520, which overflows.
  CHECK(quantize(65519.0, PrecisionMode::Fp16) == 65504.0);
  CHECK(quantize(65520.0, PrecisionMode::Fp16) == kInf);
  CHECK(quantize(-65520.0, PrecisionMode::Fp16) == -kInf);
  CHECK(quantize(1e30, PrecisionMode::Fp16) == kInf);
}

TEST_CASE("half-width subnormals and underflow") {
  const double min_sub = 0x1p-24;
  CHECK(quantize(min_sub, PrecisionMode::Fp16) == min_sub);
  CHECK(quantize(0x1p-25, PrecisionMode::Fp16) == 0.0);          // tie to even 0
  CHECK(quantize(1.5 * 0x1p-25, PrecisionMode::Fp16) == min_sub);
  CHECK(quantize(0x1p-26, PrecisionMode::Fp16) == 0.0);
  const double tiny_neg = quantize(-0x1p-26, PrecisionMode::Fp16);
  CHECK(tiny_neg == 0.0);
  CHECK(std::signbit(tiny_neg));
  // Smallest normal and the largest subnormal are distinct values.
  CHECK(quantize(0x1p-14, PrecisionMode::Fp16) == 0x1p-14);
  CHECK(quantize(0x1.ff8p-15, PrecisionMode::Fp16) == 0x1.ff8p-15);
}

TEST_CASE("bfloat rounding and range") {
  // The ulp at 1.0 is 2^-7: a quarter-ulp offset rounds away, the half-ulp
  // tie resolves to even, and just past the tie the next value wins.
  CHECK(quantize(1.0 + 0x1p-9, PrecisionMode::Bf16) == 1.0);
  CHECK(quantize(1.0 + 0x1p-8, PrecisionMode::Bf16) == 1.0);
  CHECK(quantize(std::nextafter(1.0 + 0x1p-8, 2.0), PrecisionMode::Bf16) == 1.0 + 0x1p-7);
  CHECK(quantize(1.0 + 0x1p-7, PrecisionMode::Bf16) == 1.0 + 0x1p-7);
  const double max_bf = 0x1.fep127;
  CHECK(triaccel::QuantSpec::bf16().max_finite == max_bf);
  CHECK(quantize(max_bf, PrecisionMode::Bf16) == max_bf);
  CHECK(quantize(0x1.fe8p127, PrecisionMode::Bf16) == max_bf);   // below midpoint
  CHECK(quantize(0x1.ffp127, PrecisionMode::Bf16) == kInf);      // midpoint ties away
  CHECK(quantize(1e39, PrecisionMode::Bf16) == kInf);
  // Deep subnormal doubles are far below bfloat's range.
  CHECK(quantize(5e-324, PrecisionMode::Bf16) == 0.0);
}

TEST_CASE("specials propagate") {
  for (auto mode : {PrecisionMode::Fp16, PrecisionMode::Bf16}) {
    CHECK(std::isnan(quantize(std::nan(""), mode)));
    CHECK(quantize(kInf, mode) == kInf);
    CHECK(quantize(-kInf, mode) == -kInf);
    CHECK(oracle::same_bits(quantize(0.0, mode), 0.0));
    CHECK(oracle::same_bits(quantize(-0.0, mode), -0.0));
  }
}

TEST_CASE("quantize matches the bit-level reference") {
  triaccel::Rng rng(0xbeef01);
  for (int i = 0; i < 10000; ++i) {
    const double x = random_wide_value(rng, -30, 20);
    CHECK(oracle::same_bits(quantize(x, PrecisionMode::Fp16), oracle::quantize_fp16_bits(x)));
  }
  for (int i = 0; i < 10000; ++i) {
    const double x = random_wide_value(rng, -140, 130);
    CHECK(oracle::same_bits(quantize(x, PrecisionMode::Bf16), oracle::quantize_bf16_bits(x)));
  }
}

TEST_CASE("quantization properties hold under fuzzing") {
  triaccel::Rng rng(0xbeef02);
  for (auto mode : {PrecisionMode::Fp16, PrecisionMode::Bf16}) {
    for (int i = 0; i < 4000; ++i) {
      const double x = random_wide_value(rng, -30, 18);
      const double qx = quantize(x, mode);
      // Idempotent.
      CHECK(oracle::same_bits(quantize(qx, mode), qx));
      // Odd symmetry.
      CHECK(oracle::same_bits(quantize(-x, mode), -qx));
      // Monotone.
      const double y = random_wide_value(rng, -30, 18);
      const double qy = quantize(y, mode);
      if (x <= y) {
        CHECK(qx <= qy);
      } else {
        CHECK(qx >= qy);
      }
    }
  }
}

TEST_CASE("representable values survive unchanged") {
  triaccel::Rng rng(0xbeef03);
  const auto spec16 = triaccel::QuantSpec::fp16();
  for (int i = 0; i < 2000; ++i) {
    // Build an exactly representable half value: 11-bit mantissa integer
    // scaled into range.
    const auto mant = static_cast<double>(1024 + rng.uniform_below(1024));
    const int e = -14 + static_cast<int>(rng.uniform_below(29));  // [-14, 14]
    const double x = std::ldexp(mant, e - spec16.significand_bits);
    CHECK(oracle::same_bits(quantize(x, PrecisionMode::Fp16), x));
  }
}

TEST_CASE("rounding error stays within half an ulp") {
  triaccel::Rng rng(0xbeef04);
  const auto spec = triaccel::QuantSpec::bf16();
  for (int i = 0; i < 2000; ++i) {
    const double x = random_wide_value(rng, -60, 60);
    const double qx = quantize(x, PrecisionMode::Bf16);
    int e;
    std::frexp(std::fabs(x), &e);
    const double ulp = std::ldexp(1.0, (e - 1) - spec.significand_bits);
    CHECK(std::fabs(qx - x) <= 0.5 * ulp + 1e-300);
  }
}

TEST_CASE("buffer helpers quantize elementwise") {
  std::vector<double> vals = {1.0 + 0x1p-11, -65520.0, 0.3, 0.0};
  auto copy = triaccel::quantized(vals, PrecisionMode::Fp16);
  REQUIRE(copy.size() == vals.size());
  CHECK(copy[0] == 1.0);
  CHECK(copy[1] == -kInf);
  CHECK(copy[2] == quantize(0.3, PrecisionMode::Fp16));
  CHECK(copy[3] == 0.0);
  // In-place version agrees.
  triaccel::quantize_buffer(vals, PrecisionMode::Fp16);
  for (size_t i = 0; i < vals.size(); ++i) CHECK(oracle::same_bits(vals[i], copy[i]));

  std::vector<double> untouched = {1.0 + 1e-12, 3.5e38};
  const auto before = untouched;
  triaccel::quantize_buffer(untouched, PrecisionMode::Fp32);
  CHECK(untouched == before);
}

TEST_CASE("mode names round-trip and bad names throw") {
  for (auto mode : {PrecisionMode::Fp16, PrecisionMode::Bf16, PrecisionMode::Fp32}) {
    CHECK(triaccel::precision_from_string(triaccel::to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(triaccel::precision_from_string("fp64"), triaccel::ConfigError);
  CHECK_THROWS_AS(triaccel::QuantSpec::for_mode(PrecisionMode::Fp32), triaccel::ConfigError);
  CHECK(triaccel::stability_rank(PrecisionMode::Fp16) < triaccel::stability_rank(PrecisionMode::Bf16));
  CHECK(triaccel::stability_rank(PrecisionMode::Bf16) < triaccel::stability_rank(PrecisionMode::Fp32));
}
