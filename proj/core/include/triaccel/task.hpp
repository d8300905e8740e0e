#pragma once

#include <cstdint>
#include <vector>

#include "triaccel/network.hpp"

namespace triaccel {

// Gaussian-mixture classification: class means on a sphere of radius
// `mean_radius`, isotropic noise around them. mean_radius/noise sets the
// difficulty.
struct TaskConfig {
  int input_dim = 8;
  int classes = 4;
  int train_samples = 9600;
  int test_samples = 2048;
  double mean_radius = 2.2;
  double noise = 1.0;
};

void validate(const TaskConfig& cfg);

struct Dataset {
  Matrix inputs;
  std::vector<int> labels;
  int size() const { return inputs.rows; }
};

struct Task {
  Dataset train;
  Dataset test;
};

// Deterministic in (cfg, seed). Labels are balanced round-robin.
Task make_task(const TaskConfig& cfg, uint64_t seed);

// Copy of the rows picked by `indices`, preserving order.
Dataset gather(const Dataset& data, const std::vector<int>& indices);

}  // namespace triaccel
