#pragma once

#include <cstdint>
#include <vector>

#include "triaccel/hvp.hpp"

namespace triaccel {

struct CurvatureConfig {
  int top_k = 5;
  int period_steps = 200;   // probe cadence inside the training loop
  int probe_batch = 32;
  int max_iters = 100;
  double tol = 1e-6;
  uint64_t seed = 1234;
};

struct EigenPair {
  double value = 0.0;           // signed Rayleigh quotient
  std::vector<double> vector;
  int iterations = 0;
  bool converged = false;
};

struct CurvatureEstimate {
  std::vector<EigenPair> pairs;  // sorted by descending |value|
};

// Power iteration from a seeded random unit start. Returns the signed
// Rayleigh quotient of the final iterate; converged when successive Rayleigh
// quotients differ by less than tol * max(1, |value|). A zero operator image
// terminates immediately with eigenvalue 0.
EigenPair power_iterate(const HvpOperator& op, const CurvatureConfig& cfg);

// Same recurrence from a caller-chosen start vector (normalized internally).
EigenPair power_iterate(const HvpOperator& op, const CurvatureConfig& cfg,
                        std::vector<double> start);

// Top-k eigenvalues by magnitude via rank-one deflation, re-orthogonalizing
// every iterate against the vectors already found. Throws ConfigError when
// top_k exceeds the operator dimension.
CurvatureEstimate estimate_top_k(const HvpOperator& op, const CurvatureConfig& cfg);

// Largest *signed* eigenvalue among the estimates (not largest magnitude).
double max_signed(const CurvatureEstimate& est);

}  // namespace triaccel
