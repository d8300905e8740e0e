#include "triaccel/control_loop.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "triaccel/errors.hpp"
#include "triaccel/hvp.hpp"
#include "triaccel/rng.hpp"

namespace triaccel {

namespace {
constexpr double kDivergenceLoss = 1e6;
}

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Fp32Baseline: return "fp32_baseline";
    case RunMode::StaticMixed: return "static_mixed";
    case RunMode::TriAccel: return "tri_accel";
    case RunMode::AblationPrecisionOnly: return "ablation_precision_only";
    case RunMode::AblationBatchOnly: return "ablation_batch_only";
  }
  return "?";
}

RunMode run_mode_from_string(const std::string& s) {
  for (RunMode m : all_run_modes())
    if (s == to_string(m)) return m;
  throw ConfigError("unknown run mode '" + s + "'");
}

std::vector<RunMode> all_run_modes() {
  return {RunMode::Fp32Baseline, RunMode::StaticMixed, RunMode::TriAccel,
          RunMode::AblationPrecisionOnly, RunMode::AblationBatchOnly};
}

ModeFlags mode_flags(RunMode m) {
  switch (m) {
    case RunMode::Fp32Baseline:
      return {false, false, false, PrecisionMode::Fp32};
    case RunMode::StaticMixed:
      return {false, false, false, PrecisionMode::Bf16};
    case RunMode::TriAccel:
      return {true, true, true, PrecisionMode::Bf16};
    case RunMode::AblationPrecisionOnly:
      return {true, true, false, PrecisionMode::Fp32};
    case RunMode::AblationBatchOnly:
      return {false, false, true, PrecisionMode::Fp32};
  }
  return {};
}

double precision_time_factor(PrecisionMode m) {
  switch (m) {
    case PrecisionMode::Fp16: return 0.5;
    case PrecisionMode::Bf16: return 0.55;
    case PrecisionMode::Fp32: return 1.0;
  }
  return 1.0;
}

void validate(const ControlLoopConfig& cfg) {
  if (cfg.total_steps <= 0) throw ConfigError("loop: total_steps must be positive");
  if (cfg.ctrl_period <= 0) throw ConfigError("loop: ctrl_period must be positive");
  if (cfg.warmup_epochs < 0) throw ConfigError("loop: warmup_epochs must be non-negative");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ConfigError("loop: momentum in [0,1)");
  if (!(cfg.loss_scale > 0.0)) throw ConfigError("loop: loss_scale must be positive");
  if (cfg.hidden.empty()) throw ConfigError("loop: need at least one hidden layer");
  for (int h : cfg.hidden)
    if (h <= 0) throw ConfigError("loop: hidden widths must be positive");
  if (!(cfg.hidden_init_scale > 0.0) || !(cfg.output_init_scale > 0.0))
    throw ConfigError("loop: init scales must be positive");
}

void validate(const TrainSetup& setup) {
  validate(setup.loop);
  validate(setup.task);
  validate(setup.sched);
  validate(setup.batch);
  if (setup.initial_batch < setup.batch.batch_min || setup.initial_batch > setup.batch.batch_max)
    throw ConfigError("setup: initial_batch outside [batch_min, batch_max]");
  if (!(setup.variance_beta >= 0.0 && setup.variance_beta < 1.0))
    throw ConfigError("setup: variance_beta must be in [0, 1)");
  if (setup.mem_max <= 0) throw ConfigError("setup: mem_max must be positive");
  if (setup.mem_overhead_bytes < 0) throw ConfigError("setup: negative memory overhead");
  if (setup.curv.top_k <= 0 || setup.curv.period_steps <= 0 || setup.curv.probe_batch <= 0 ||
      setup.curv.max_iters <= 0 || !(setup.curv.tol > 0.0))
    throw ConfigError("setup: bad curvature config");
}

double lr_schedule_factor(const ControlLoopConfig& cfg, const TaskConfig& task, int initial_batch,
                          int64_t step) {
  const int steps_per_epoch = (task.train_samples + initial_batch - 1) / initial_batch;
  const int64_t warmup = static_cast<int64_t>(cfg.warmup_epochs) * steps_per_epoch;
  if (step < warmup) return static_cast<double>(step + 1) / static_cast<double>(warmup);
  const int64_t decay_span = std::max<int64_t>(1, cfg.total_steps - warmup);
  const double progress = static_cast<double>(step - warmup) / static_cast<double>(decay_span);
  return 0.5 * (1.0 + std::cos(M_PI * progress));
}

PrecisionMap current_precision(const ControlState& state) {
  PrecisionMap map;
  map.reserve(state.layers.size());
  for (const LayerState& ls : state.layers) map.push_back(ls.precision);
  return map;
}

TickRecord control_tick(ControlState& state, const VarianceTracker& tracker,
                        const SchedulerConfig& sched, const CurvatureConfig& curv,
                        const BatchControllerConfig& batch_cfg, const MemoryModel& memory,
                        const ModeFlags& flags, bool probe_due,
                        const std::function<CurvatureEstimate(int layer)>& probe, int64_t now) {
  const int layers = static_cast<int>(state.layers.size());
  if (static_cast<int>(state.estimates.size()) != layers)
    throw ConfigError("control_tick: estimate slots do not match layer count");
  if (tracker.layer_count() != layers)
    throw ConfigError("control_tick: tracker does not match layer count");

  TickRecord record;
  record.step = now;

  // (1) statistics: variance EMAs were fed every step; refresh curvature
  // estimates when a probe is due.
  const bool run_probe = flags.curvature && probe_due;
  if (run_probe) {
    if (!probe) throw ConfigError("control_tick: probe requested but none supplied");
    for (int l = 0; l < layers; ++l) state.estimates[l] = probe(l);
    record.probed = true;
  }
  record.phases.push_back({TickPhase::CollectStats, mode_adapts(flags)});

  // (2) precision assignment; fresh estimates may promote first.
  bool precision_changed = false;
  if (flags.dynamic_precision) {
    for (int l = 0; l < layers; ++l) {
      LayerState& ls = state.layers[l];
      const PrecisionMode before = ls.precision;
      if (run_probe && state.estimates[l])
        apply_curvature_promotion(ls, *state.estimates[l], sched, now, curv.period_steps);
      assign_precision(ls, tracker.value(l), sched, now);
      precision_changed |= (ls.precision != before);
    }
  }
  record.phases.push_back({TickPhase::AdjustPrecision, precision_changed});

  // (3) per-layer learning rates from the latest curvature estimates.
  bool lr_changed = false;
  for (int l = 0; l < layers; ++l) {
    LayerState& ls = state.layers[l];
    const double before = ls.effective_lr;
    if (flags.curvature && state.estimates[l]) {
      ls.effective_lr = scale_lr(sched, max_signed(*state.estimates[l]));
    } else {
      ls.effective_lr = sched.eta0;
    }
    lr_changed |= (ls.effective_lr != before);
  }
  record.phases.push_back({TickPhase::AdaptLr, lr_changed});

  // (4) batch size, fed with the usage implied by the precision map assigned
  // in phase (2).
  bool batch_changed = false;
  if (flags.dynamic_batch) {
    const int64_t usage = memory.usage_bytes(state.batch.batch, current_precision(state));
    const BatchControllerState next = adjust_batch(state.batch, batch_cfg, usage, memory.mem_max);
    batch_changed = (next.batch != state.batch.batch);
    state.batch = next;
  }
  record.phases.push_back({TickPhase::AdjustBatch, batch_changed});

  return record;
}

TrainResult train(const TrainSetup& setup, RunMode mode, uint64_t seed) {
  validate(setup);
  const auto wall_start = std::chrono::steady_clock::now();
  const ModeFlags flags = mode_flags(mode);

  const Task task = make_task(setup.task, seed);

  std::vector<LayerSpec> specs;
  std::vector<double> init_scales;
  int prev = setup.task.input_dim;
  for (int h : setup.loop.hidden) {
    specs.push_back({prev, h, setup.loop.activation});
    init_scales.push_back(setup.loop.hidden_init_scale);
    prev = h;
  }
  specs.push_back({prev, setup.task.classes, Activation::Identity});
  init_scales.push_back(setup.loop.output_init_scale);
  Network net = Network::make(specs, mix_seed(seed, 0x111717), init_scales);
  const int layers = net.layer_count();

  const MemoryModel memory = memory_model_for(net, setup.mem_overhead_bytes, setup.mem_max);

  // Per-layer compute cost used by the simulated clock, normalized so one
  // unit is a thousand full-width sample passes.
  std::vector<double> layer_cost(layers);
  double total_cost = 0.0;
  for (int l = 0; l < layers; ++l) {
    const LayerSpec& s = net.layer(l).spec;
    layer_cost[l] = static_cast<double>(s.in_dim) * s.out_dim + s.out_dim;
    total_cost += layer_cost[l];
  }

  ControlState state;
  state.layers.assign(layers, LayerState{});
  for (LayerState& ls : state.layers) {
    ls.precision = flags.initial_precision;
    ls.effective_lr = setup.sched.eta0;
  }
  state.estimates.assign(layers, std::nullopt);
  state.batch.batch = setup.initial_batch;

  VarianceTracker tracker(layers, setup.variance_beta);

  TrainResult result;
  result.final_loss_scale = setup.loop.loss_scale;

  // Momentum buffers at full width, flattened per layer.
  std::vector<std::vector<double>> velocity(layers);
  for (int l = 0; l < layers; ++l) velocity[l].assign(net.layer_param_count(l), 0.0);

  Rng batch_rng(mix_seed(seed, 0xba7c4));
  double loss_scale = setup.loop.loss_scale;
  int consecutive_nan = 0;

  for (int64_t t = 0; t < setup.loop.total_steps; ++t) {
    const int B = state.batch.batch;
    std::vector<int> indices(B);
    for (int i = 0; i < B; ++i)
      indices[i] = static_cast<int>(batch_rng.uniform_below(task.train.size()));
    const Dataset minibatch = gather(task.train, indices);

    const PrecisionMap pmap = current_precision(state);
    const ForwardCache fwd = forward(net, minibatch.inputs, pmap);
    const BackwardResult bwd = backward(net, fwd, minibatch.labels, pmap, loss_scale);

    double step_cost = 0.0;
    for (int l = 0; l < layers; ++l)
      step_cost += layer_cost[l] * precision_time_factor(pmap[l]);
    const double sim_step = B * step_cost / (1000.0 * total_cost);
    result.sim_time_units += sim_step;

    const int64_t usage = memory.usage_bytes(B, pmap);
    result.peak_mem_bytes = std::max(result.peak_mem_bytes, usage);

    for (int l = 0; l < layers; ++l) tracker.update(l, instant_variance(bwd.grads[l]));

    // Snapshot of the rates in force during this step, before any tick.
    std::vector<double> lr_used(layers);
    for (int l = 0; l < layers; ++l) lr_used[l] = state.layers[l].effective_lr;

    bool abort_now = false;
    if (bwd.non_finite) {
      ++consecutive_nan;
      if (consecutive_nan >= 2) {
        result.anomalies.push_back({t, "nan_after_recovery"});
        result.aborted = true;
        result.abort_reason = "non-finite loss twice in a row";
        abort_now = true;
      } else {
        result.anomalies.push_back({t, "nan_recovery"});
        for (LayerState& ls : state.layers) ls.precision = PrecisionMode::Fp32;
        loss_scale *= 0.5;
        // Update skipped: the gradients are unusable.
      }
    } else {
      consecutive_nan = 0;
      const double lr_factor =
          lr_schedule_factor(setup.loop, setup.task, setup.initial_batch, t);
      for (int l = 0; l < layers; ++l) {
        Layer& layer = net.layer(l);
        const double step_lr = lr_factor * state.layers[l].effective_lr;
        const size_t wn = layer.weight.data.size();
        std::vector<double>& vel = velocity[l];
        const std::vector<double>& g = bwd.grads[l];
        for (size_t i = 0; i < wn; ++i) {
          vel[i] = setup.loop.momentum * vel[i] + g[i];
          layer.weight.data[i] -= step_lr * vel[i];
        }
        for (size_t i = 0; i < layer.bias.size(); ++i) {
          vel[wn + i] = setup.loop.momentum * vel[wn + i] + g[wn + i];
          layer.bias[i] -= step_lr * vel[wn + i];
        }
      }
      if (bwd.loss > kDivergenceLoss) {
        result.anomalies.push_back({t, "divergence"});
        result.aborted = true;
        result.abort_reason = "loss exceeded divergence bound";
        abort_now = true;
      }
    }

    bool probed_this_step = false;
    if (!abort_now && mode_adapts(flags) && t > 0 && t % setup.loop.ctrl_period == 0) {
      const bool probe_due = flags.curvature && (t % setup.curv.period_steps == 0);
      auto probe = [&](int l) {
        Rng probe_rng(mix_seed(seed, 0x9b0be, t));
        std::vector<int> pidx(setup.curv.probe_batch);
        for (int i = 0; i < setup.curv.probe_batch; ++i)
          pidx[i] = static_cast<int>(probe_rng.uniform_below(task.train.size()));
        const Dataset probe_batch = gather(task.train, pidx);
        NetworkLayerHvp op(net, l, probe_batch.inputs, probe_batch.labels);
        CurvatureConfig cfg = setup.curv;
        cfg.seed = mix_seed(setup.curv.seed, static_cast<uint64_t>(t), l);
        return estimate_top_k(op, cfg);
      };
      TickRecord tick = control_tick(state, tracker, setup.sched, setup.curv, setup.batch,
                                     memory, flags, probe_due, probe, t);
      probed_this_step = tick.probed;
      result.ticks.push_back(std::move(tick));
    }

    StepEvent ev;
    ev.step = t;
    ev.loss = bwd.loss;
    ev.batch = B;
    ev.usage_bytes = usage;
    ev.precision = pmap;
    ev.effective_lr = std::move(lr_used);
    ev.curvature_event = probed_this_step;
    ev.sim_time_units = sim_step;
    result.events.push_back(std::move(ev));

    if (abort_now) break;
  }

  if (result.aborted) {
    result.accuracy_pct = std::numeric_limits<double>::quiet_NaN();
  } else {
    result.accuracy_pct = evaluate_accuracy_pct(net, task.test.inputs, task.test.labels);
  }
  result.final_loss_scale = loss_scale;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

}  // namespace triaccel
