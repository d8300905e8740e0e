#include "triaccel/grad_stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "triaccel/errors.hpp"

namespace triaccel {

double instant_variance(std::span<const double> grad) {
  if (grad.empty()) throw ConfigError("instant_variance: empty gradient");
  for (double g : grad) {
    if (!std::isfinite(g)) return std::numeric_limits<double>::infinity();
  }
  // Welford, single pass.
  double mean = 0.0, m2 = 0.0;
  size_t count = 0;
  for (double g : grad) {
    ++count;
    const double d = g - mean;
    mean += d / count;
    m2 += d * (g - mean);
  }
  return m2 / count;
}

VarianceTracker::VarianceTracker(int layer_count, double beta) : beta_(beta) {
  if (layer_count <= 0) throw ConfigError("VarianceTracker: need at least one layer");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("VarianceTracker: beta must be in [0, 1)");
  slots_.resize(layer_count);
}

double VarianceTracker::update(int layer, double variance) {
  if (layer < 0 || layer >= layer_count())
    throw ConfigError("VarianceTracker: unknown layer " + std::to_string(layer));
  Slot& slot = slots_[layer];
  if (!std::isfinite(variance)) {
    slot.v = std::numeric_limits<double>::infinity();
    // Sentinel is not a sample: the next finite variance re-bootstraps.
    slot.initialized = false;
    return slot.v;
  }
  if (!slot.initialized || !std::isfinite(slot.v)) {
    slot.v = variance;
    slot.initialized = true;
  } else {
    slot.v = beta_ * slot.v + (1.0 - beta_) * variance;
  }
  return slot.v;
}

double VarianceTracker::value(int layer) const {
  if (layer < 0 || layer >= layer_count())
    throw ConfigError("VarianceTracker: unknown layer " + std::to_string(layer));
  return slots_[layer].v;
}

bool VarianceTracker::initialized(int layer) const {
  if (layer < 0 || layer >= layer_count())
    throw ConfigError("VarianceTracker: unknown layer " + std::to_string(layer));
  return slots_[layer].initialized;
}

}  // namespace triaccel
