#pragma once

#include <span>
#include <vector>

namespace triaccel {

// Population variance of the gradient elements of one layer at one step.
// Any non-finite element yields the +inf marker, which downstream logic
// treats as larger than every threshold. Throws ConfigError on empty input.
double instant_variance(std::span<const double> grad);

// Per-layer EMA of instantaneous gradient variance:
//   v <- beta * v + (1 - beta) * var
// The first update of a layer stores var directly instead of blending with
// the zero initial state. A non-finite var stores the +inf sentinel; the next
// finite var re-bootstraps the EMA.
class VarianceTracker {
 public:
  VarianceTracker(int layer_count, double beta);

  // Returns the updated EMA value. Throws ConfigError for unknown layers.
  double update(int layer, double variance);
  double value(int layer) const;
  bool initialized(int layer) const;
  int layer_count() const { return static_cast<int>(slots_.size()); }
  double beta() const { return beta_; }

 private:
  struct Slot {
    double v = 0.0;
    bool initialized = false;
  };
  double beta_;
  std::vector<Slot> slots_;
};

}  // namespace triaccel
