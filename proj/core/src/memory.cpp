#include "triaccel/memory.hpp"

#include <algorithm>

#include "triaccel/errors.hpp"

namespace triaccel {

int bytes_per_value(PrecisionMode m) {
  switch (m) {
    case PrecisionMode::Fp16: return 2;
    case PrecisionMode::Bf16: return 2;
    case PrecisionMode::Fp32: return 4;
  }
  return 4;
}

int64_t MemoryModel::per_sample_bytes(const PrecisionMap& precision_map) const {
  if (precision_map.size() != layer_sample_values.size())
    throw ConfigError("memory model: precision map does not cover every layer");
  int64_t total = 0;
  for (size_t l = 0; l < precision_map.size(); ++l)
    total += static_cast<int64_t>(layer_sample_values[l]) * bytes_per_value(precision_map[l]);
  return total;
}

int64_t MemoryModel::usage_bytes(int batch, const PrecisionMap& precision_map) const {
  if (batch < 0) throw ConfigError("memory model: negative batch");
  return fixed_bytes + static_cast<int64_t>(batch) * per_sample_bytes(precision_map);
}

MemoryModel memory_model_for(const Network& net, int64_t overhead_bytes, int64_t mem_max) {
  if (mem_max <= 0) throw ConfigError("memory model: mem_max must be positive");
  MemoryModel model;
  model.fixed_bytes = static_cast<int64_t>(net.param_count()) * 8 + overhead_bytes;
  for (int l = 0; l < net.layer_count(); ++l) {
    const LayerSpec& s = net.layer(l).spec;
    model.layer_sample_values.push_back(s.in_dim + 2 * s.out_dim);
  }
  model.mem_max = mem_max;
  return model;
}

const char* to_string(BatchDecision d) {
  switch (d) {
    case BatchDecision::Hold: return "hold";
    case BatchDecision::Up: return "up";
    case BatchDecision::Down: return "down";
  }
  return "?";
}

void validate(const BatchControllerConfig& cfg) {
  if (!(cfg.rho_low > 0.0) || !(cfg.rho_high > cfg.rho_low) || !(cfg.rho_high < 1.0))
    throw ConfigError("batch controller: need 0 < rho_low < rho_high < 1");
  if (cfg.delta_up <= 0 || cfg.delta_down <= 0)
    throw ConfigError("batch controller: deltas must be positive");
  if (cfg.batch_min < 1 || cfg.batch_max < cfg.batch_min)
    throw ConfigError("batch controller: need 1 <= batch_min <= batch_max");
}

BatchControllerState adjust_batch(const BatchControllerState& state,
                                  const BatchControllerConfig& cfg, int64_t usage_bytes,
                                  int64_t mem_max) {
  if (mem_max <= 0) throw ConfigError("adjust_batch: mem_max must be positive");
  BatchControllerState next = state;
  const double usage = static_cast<double>(usage_bytes);
  if (usage < cfg.rho_low * mem_max) {
    next.batch = state.batch + cfg.delta_up;
    next.last_decision = BatchDecision::Up;
  } else if (usage > cfg.rho_high * mem_max) {
    next.batch = state.batch - cfg.delta_down;
    next.last_decision = BatchDecision::Down;
  } else {
    next.last_decision = BatchDecision::Hold;
  }
  next.batch = std::clamp(next.batch, cfg.batch_min, cfg.batch_max);
  return next;
}

SettleResult settle(const MemoryModel& model, const BatchControllerConfig& cfg,
                    BatchControllerState state, const PrecisionMap& precision_map) {
  validate(cfg);
  SettleResult result;
  const int min_delta = std::min(cfg.delta_up, cfg.delta_down);
  const int limit = (cfg.batch_max + min_delta - 1) / min_delta + 2;

  for (int k = 0; k < limit; ++k) {
    const int64_t usage = model.usage_bytes(state.batch, precision_map);
    const BatchControllerState next = adjust_batch(state, cfg, usage, model.mem_max);

    SettleStep step;
    step.batch_before = state.batch;
    step.usage_bytes = usage;
    step.decision = next.last_decision;
    step.batch_after = next.batch;
    result.trace.push_back(step);

    if (next.last_decision == BatchDecision::Hold) {
      result.outcome = SettleOutcome::Hold;
      result.final_batch = next.batch;
      return result;
    }
    if (next.batch == state.batch) {
      result.outcome = SettleOutcome::Saturated;
      result.final_batch = next.batch;
      return result;
    }
    const size_t k_now = result.trace.size() - 1;
    if (k_now >= 2) {
      const SettleStep& back2 = result.trace[k_now - 2];
      if (back2.batch_before == step.batch_before && back2.batch_after == step.batch_after &&
          step.batch_before != step.batch_after) {
        result.outcome = SettleOutcome::Cycle;
        result.final_batch = next.batch;
        return result;
      }
    }
    state = next;
  }
  result.outcome = SettleOutcome::IterationLimit;
  result.final_batch = state.batch;
  return result;
}

}  // namespace triaccel
