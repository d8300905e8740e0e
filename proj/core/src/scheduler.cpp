#include "triaccel/scheduler.hpp"

#include <cmath>

#include "triaccel/errors.hpp"

namespace triaccel {

void validate(const SchedulerConfig& cfg) {
  if (!(cfg.tau_low > 0.0) || !(cfg.tau_high > cfg.tau_low))
    throw ConfigError("scheduler: need 0 < tau_low < tau_high");
  if (!(cfg.eta0 > 0.0)) throw ConfigError("scheduler: eta0 must be positive");
  if (cfg.alpha < 0.0) throw ConfigError("scheduler: alpha must be non-negative");
}

PrecisionMode select_precision(double variance_ema, const SchedulerConfig& cfg) {
  if (!std::isfinite(variance_ema)) return PrecisionMode::Fp32;
  if (variance_ema < cfg.tau_low) return PrecisionMode::Fp16;
  if (variance_ema < cfg.tau_high) return PrecisionMode::Bf16;
  return PrecisionMode::Fp32;
}

void apply_curvature_promotion(LayerState& state, const CurvatureEstimate& estimate,
                               const SchedulerConfig& cfg, int64_t now, int period_steps) {
  if (max_signed(estimate) > cfg.tau_curv) {
    state.precision = PrecisionMode::Fp32;
    state.promoted_by_curvature = true;
    state.promotion_expiry_step = now + period_steps;
  }
}

void assign_precision(LayerState& state, double variance_ema, const SchedulerConfig& cfg,
                      int64_t now) {
  if (state.promoted_by_curvature && now >= state.promotion_expiry_step)
    state.promoted_by_curvature = false;
  if (state.promoted_by_curvature) {
    state.precision = PrecisionMode::Fp32;
  } else {
    state.precision = select_precision(variance_ema, cfg);
  }
}

double scale_lr(const SchedulerConfig& cfg, double max_signed_lambda) {
  const double sharp = std::max(0.0, max_signed_lambda);
  return cfg.eta0 / (1.0 + cfg.alpha * sharp);
}

}  // namespace triaccel
