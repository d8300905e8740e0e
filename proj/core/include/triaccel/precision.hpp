#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace triaccel {

// Numeric mode of a layer's compute copies. Fp32 means "leave values at full
// working width"; Fp16/Bf16 emulate the narrow format in software.
enum class PrecisionMode : uint8_t { Fp16 = 0, Bf16 = 1, Fp32 = 2 };

// Fp16 < Bf16 < Fp32 in numerical stability.
inline constexpr int stability_rank(PrecisionMode m) { return static_cast<int>(m); }

const char* to_string(PrecisionMode m);
// Accepts "fp16" / "bf16" / "fp32", throws ConfigError otherwise.
PrecisionMode precision_from_string(const std::string& s);

// Format geometry for the emulated narrow types.
struct QuantSpec {
  int exponent_bits;
  int significand_bits;   // stored (explicit) mantissa bits
  double max_finite;
  int min_exponent() const { return 2 - (1 << (exponent_bits - 1)); }  // emin of normals
  static QuantSpec fp16();
  static QuantSpec bf16();
  static QuantSpec for_mode(PrecisionMode m);  // Fp32 has no spec; throws
};

// Round x to the nearest value representable in `mode` (ties to even).
// Fp32 returns x unchanged. Overflow beyond max_finite gives signed infinity,
// NaN propagates, subnormals of the target format are honored, and values
// below half the smallest subnormal flush to signed zero.
double quantize(double x, PrecisionMode mode);

// Elementwise quantize, in place.
void quantize_buffer(std::span<double> values, PrecisionMode mode);
std::vector<double> quantized(std::span<const double> values, PrecisionMode mode);

}  // namespace triaccel
