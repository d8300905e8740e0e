#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "triaccel/network.hpp"
#include "triaccel/rng.hpp"

namespace oracle {

inline bool same_bits(double a, double b) {
  return std::bit_cast<uint64_t>(a) == std::bit_cast<uint64_t>(b);
}

// Closed form of the bootstrap-then-blend average: after the first sample the
// state equals var_1; each later sample blends v <- beta*v + (1-beta)*var.
inline double ema_closed_form(const std::vector<double>& vars, double beta) {
  double acc = vars.front();
  for (size_t i = 1; i < vars.size(); ++i) acc = beta * acc + (1.0 - beta) * vars[i];
  return acc;
}

// Same quantity evaluated as an explicit weighted sum rather than the
// recurrence, so the two disagree if either derivation is off.
inline double ema_weighted_sum(const std::vector<double>& vars, double beta) {
  const size_t t = vars.size();
  double total = 0.0;
  for (size_t i = 1; i < t; ++i) {
    double w = 1.0 - beta;
    for (size_t j = i + 1; j < t; ++j) w *= beta;
    total += w * vars[i];
  }
  double w0 = 1.0;
  for (size_t j = 1; j < t; ++j) w0 *= beta;
  return total + w0 * vars.front();
}

// Two-pass population variance, independent of the streaming implementation.
inline double two_pass_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size());
}

inline triaccel::Matrix random_batch(triaccel::Rng& rng, int rows, int cols, double scale = 1.0) {
  triaccel::Matrix m(rows, cols);
  for (double& v : m.data) v = scale * rng.normal();
  return m;
}

inline std::vector<int> random_labels(triaccel::Rng& rng, int rows, int classes) {
  std::vector<int> out(rows);
  for (int& v : out) v = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(classes)));
  return out;
}

}  // namespace oracle
