#include "triaccel/precision.hpp"

#include <cmath>
#include <limits>

#include "triaccel/errors.hpp"

namespace triaccel {

const char* to_string(PrecisionMode m) {
  switch (m) {
    case PrecisionMode::Fp16: return "fp16";
    case PrecisionMode::Bf16: return "bf16";
    case PrecisionMode::Fp32: return "fp32";
  }
  return "?";
}

PrecisionMode precision_from_string(const std::string& s) {
  if (s == "fp16") return PrecisionMode::Fp16;
  if (s == "bf16") return PrecisionMode::Bf16;
  if (s == "fp32") return PrecisionMode::Fp32;
  throw ConfigError("unknown precision mode '" + s + "'");
}

QuantSpec QuantSpec::fp16() { return {5, 10, 65504.0}; }

QuantSpec QuantSpec::bf16() {
  // (2 - 2^-7) * 2^127
  return {8, 7, 0x1.fep127};
}

QuantSpec QuantSpec::for_mode(PrecisionMode m) {
  switch (m) {
    case PrecisionMode::Fp16: return fp16();
    case PrecisionMode::Bf16: return bf16();
    case PrecisionMode::Fp32: break;
  }
  throw ConfigError("fp32 has no narrow-format spec");
}

namespace {

// Round-to-nearest-even for a non-negative value known to be < 2^52.
double rne_integer(double v) {
  double f = std::floor(v);
  double frac = v - f;
  if (frac > 0.5) return f + 1.0;
  if (frac < 0.5) return f;
  return (std::fmod(f, 2.0) == 0.0) ? f : f + 1.0;
}

}  // namespace

double quantize(double x, PrecisionMode mode) {
  if (mode == PrecisionMode::Fp32) return x;
  if (std::isnan(x) || std::isinf(x) || x == 0.0) return x;

  const QuantSpec spec = QuantSpec::for_mode(mode);
  const double ax = std::fabs(x);

  int e;  // ax = f * 2^e with f in [0.5, 1)
  std::frexp(ax, &e);
  const int e_val = e - 1;  // ax in [2^e_val, 2^(e_val+1))

  // Exponent of the rounding quantum: normal-range ulp, clamped to the fixed
  // subnormal quantum below min_exponent.
  const int q = std::max(e_val - spec.significand_bits,
                         spec.min_exponent() - spec.significand_bits);

  // Power-of-two scaling is exact; the scaled magnitude is at most 2^(sig+1).
  const double scaled = std::ldexp(ax, -q);
  const double rounded = rne_integer(scaled);
  const double result = std::ldexp(rounded, q);

  if (result > spec.max_finite)
    return std::copysign(std::numeric_limits<double>::infinity(), x);
  return std::copysign(result, x);
}

void quantize_buffer(std::span<double> values, PrecisionMode mode) {
  if (mode == PrecisionMode::Fp32) return;
  for (double& v : values) v = quantize(v, mode);
}

std::vector<double> quantized(std::span<const double> values, PrecisionMode mode) {
  std::vector<double> out(values.begin(), values.end());
  quantize_buffer(out, mode);
  return out;
}

}  // namespace triaccel
