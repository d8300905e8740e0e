#pragma once

#include <cstdint>

#include "triaccel/curvature.hpp"
#include "triaccel/precision.hpp"

namespace triaccel {

struct SchedulerConfig {
  double tau_low = 1e-4;    // below: FP16
  double tau_high = 1e-2;   // at or above: FP32
  double tau_curv = 50.0;   // sharpness bound triggering promotion
  double eta0 = 0.1;
  double alpha = 0.01;      // curvature damping of the learning rate
};

// Throws ConfigError unless 0 < tau_low < tau_high, eta0 > 0, alpha >= 0.
void validate(const SchedulerConfig& cfg);

struct LayerState {
  PrecisionMode precision = PrecisionMode::Bf16;
  double effective_lr = 0.0;               // in (0, eta0]
  bool promoted_by_curvature = false;
  int64_t promotion_expiry_step = 0;
};

// Variance thresholding: v < tau_low -> FP16, tau_low <= v < tau_high -> BF16,
// v >= tau_high -> FP32. Non-finite v (the tracker's sentinel) forces FP32.
PrecisionMode select_precision(double variance_ema, const SchedulerConfig& cfg);

// When the estimate's largest signed eigenvalue exceeds tau_curv, force the
// layer to FP32 for one curvature period starting at `now`. Promotion
// overrides variance-based assignment until it expires.
void apply_curvature_promotion(LayerState& state, const CurvatureEstimate& estimate,
                               const SchedulerConfig& cfg, int64_t now, int period_steps);

// Per-tick precision assignment honoring any active promotion. Clears the
// promotion flag once now >= expiry.
void assign_precision(LayerState& state, double variance_ema, const SchedulerConfig& cfg,
                      int64_t now);

// eta0 / (1 + alpha * max(0, lambda_max)); negative curvature never raises
// the rate above eta0.
double scale_lr(const SchedulerConfig& cfg, double max_signed_lambda);

}  // namespace triaccel
