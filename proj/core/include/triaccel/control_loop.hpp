#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "triaccel/curvature.hpp"
#include "triaccel/grad_stats.hpp"
#include "triaccel/memory.hpp"
#include "triaccel/network.hpp"
#include "triaccel/scheduler.hpp"
#include "triaccel/task.hpp"

namespace triaccel {

enum class RunMode : uint8_t {
  Fp32Baseline,
  StaticMixed,
  TriAccel,
  AblationPrecisionOnly,
  AblationBatchOnly,
};

const char* to_string(RunMode m);
RunMode run_mode_from_string(const std::string& s);
std::vector<RunMode> all_run_modes();

// Which controllers a mode enables, and the precision every layer starts in.
struct ModeFlags {
  bool dynamic_precision = false;
  bool curvature = false;      // probes, promotion, LR scaling
  bool dynamic_batch = false;
  PrecisionMode initial_precision = PrecisionMode::Fp32;
};

ModeFlags mode_flags(RunMode m);
inline bool mode_adapts(const ModeFlags& f) {
  return f.dynamic_precision || f.curvature || f.dynamic_batch;
}

// Relative throughput cost of computing one value in each mode.
double precision_time_factor(PrecisionMode m);

struct ControlLoopConfig {
  int total_steps = 3000;
  int ctrl_period = 50;
  int warmup_epochs = 5;
  double momentum = 0.9;
  double loss_scale = 1024.0;     // static scale for FP16 gradients
  std::vector<int> hidden = {32, 32};
  Activation activation = Activation::Tanh;
  double hidden_init_scale = 1.0;
  double output_init_scale = 1.0;
};

void validate(const ControlLoopConfig& cfg);

// Everything train() needs besides (mode, seed).
struct TrainSetup {
  ControlLoopConfig loop;
  TaskConfig task;
  SchedulerConfig sched;
  CurvatureConfig curv;
  BatchControllerConfig batch;
  double variance_beta = 0.9;
  int initial_batch = 96;
  int64_t mem_overhead_bytes = 65536;
  int64_t mem_max = 170000;
};

void validate(const TrainSetup& setup);

// Warmup/decay multiplier on top of the per-layer rates: linear ramp over the
// warmup epochs, cosine decay to the end. Epoch length is frozen at the
// initial batch size.
double lr_schedule_factor(const ControlLoopConfig& cfg, const TaskConfig& task, int initial_batch,
                          int64_t step);

struct StepEvent {
  int64_t step = 0;
  double loss = 0.0;
  int batch = 0;
  int64_t usage_bytes = 0;
  std::vector<PrecisionMode> precision;
  std::vector<double> effective_lr;
  bool curvature_event = false;
  double sim_time_units = 0.0;  // this step's share
};

enum class TickPhase : uint8_t {
  CollectStats = 1,
  AdjustPrecision = 2,
  AdaptLr = 3,
  AdjustBatch = 4,
};

struct TickPhaseRecord {
  TickPhase phase;
  bool acted;  // whether the phase changed state (or ran probes)
};

struct TickRecord {
  int64_t step = 0;
  bool probed = false;
  std::vector<TickPhaseRecord> phases;  // always in enum order
};

struct Anomaly {
  int64_t step = 0;
  std::string kind;  // "nan_recovery", "nan_after_recovery", "divergence"
};

// Mutable controller state threaded through control ticks.
struct ControlState {
  std::vector<LayerState> layers;
  std::vector<std::optional<CurvatureEstimate>> estimates;
  BatchControllerState batch;
};

PrecisionMap current_precision(const ControlState& state);

// One control tick: (1) collect stats / run due probes, (2) assign precision,
// (3) adapt per-layer learning rates, (4) adjust the batch size using the
// usage implied by the *new* precision map. Phases always execute and are
// recorded in this order; disabled phases record acted=false.
TickRecord control_tick(ControlState& state, const VarianceTracker& tracker,
                        const SchedulerConfig& sched, const CurvatureConfig& curv,
                        const BatchControllerConfig& batch_cfg, const MemoryModel& memory,
                        const ModeFlags& flags, bool probe_due,
                        const std::function<CurvatureEstimate(int layer)>& probe, int64_t now);

struct TrainResult {
  double accuracy_pct = 0.0;   // NaN when aborted
  double sim_time_units = 0.0;
  int64_t peak_mem_bytes = 0;
  std::vector<StepEvent> events;
  std::vector<TickRecord> ticks;
  std::vector<Anomaly> anomalies;
  bool aborted = false;
  std::string abort_reason;
  double wall_seconds = 0.0;   // informational only, never serialized
  double final_loss_scale = 0.0;
};

// Full training run: deterministic in (setup, mode, seed).
TrainResult train(const TrainSetup& setup, RunMode mode, uint64_t seed);

}  // namespace triaccel
