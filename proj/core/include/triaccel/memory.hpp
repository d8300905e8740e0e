#pragma once

#include <cstdint>
#include <vector>

#include "triaccel/network.hpp"
#include "triaccel/precision.hpp"

namespace triaccel {

// Bytes one stored value occupies under each mode.
int bytes_per_value(PrecisionMode m);

// Simulated device memory: a fixed part (parameters, optimizer state,
// framework overhead) plus a per-sample part that depends on the precision
// map. Per-sample values for a layer = in_dim + 2*out_dim (input,
// pre-activation, output), matching what the forward cache holds.
struct MemoryModel {
  int64_t fixed_bytes = 0;
  std::vector<int> layer_sample_values;  // per layer
  int64_t mem_max = 0;

  int64_t per_sample_bytes(const PrecisionMap& precision_map) const;
  int64_t usage_bytes(int batch, const PrecisionMap& precision_map) const;
};

// Model for a concrete network: fixed = param_count * 8 + overhead.
MemoryModel memory_model_for(const Network& net, int64_t overhead_bytes, int64_t mem_max);

enum class BatchDecision : uint8_t { Hold = 0, Up = 1, Down = 2 };
const char* to_string(BatchDecision d);

struct BatchControllerConfig {
  double rho_low = 0.7;
  double rho_high = 0.9;
  int delta_up = 8;
  int delta_down = 8;
  int batch_min = 1;
  int batch_max = 4096;
};

void validate(const BatchControllerConfig& cfg);

struct BatchControllerState {
  int batch = 96;
  BatchDecision last_decision = BatchDecision::Hold;
};

// One controller step: usage < rho_low*mem_max grows the batch, usage >
// rho_high*mem_max shrinks it, anything else (bounds inclusive) holds.
// The result is clamped to [batch_min, batch_max]; the branch taken is
// recorded even when clamping leaves the batch unchanged.
BatchControllerState adjust_batch(const BatchControllerState& state,
                                  const BatchControllerConfig& cfg, int64_t usage_bytes,
                                  int64_t mem_max);

enum class SettleOutcome : uint8_t { Hold, Saturated, Cycle, IterationLimit };

struct SettleStep {
  int batch_before = 0;
  int64_t usage_bytes = 0;
  BatchDecision decision = BatchDecision::Hold;
  int batch_after = 0;
};

struct SettleResult {
  std::vector<SettleStep> trace;
  SettleOutcome outcome = SettleOutcome::Hold;
  int final_batch = 0;
};

// Iterate the controller against a fixed memory model and precision map until
// it holds, saturates at a bound, or enters a 2-cycle. Never exceeds
// ceil(batch_max / min(delta_up, delta_down)) + 2 iterations.
SettleResult settle(const MemoryModel& model, const BatchControllerConfig& cfg,
                    BatchControllerState state, const PrecisionMap& precision_map);

}  // namespace triaccel
