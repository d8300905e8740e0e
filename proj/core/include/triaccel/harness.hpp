#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "triaccel/control_loop.hpp"

namespace triaccel {

// Accuracy(%) per unit of (time x memory-fraction), scaled by 100.
// Throws ConfigError on non-positive time or memory.
double efficiency_score(double accuracy_pct, double time_units, double mem_usage_pct);

// Peak memory as a percentage of a reference capacity.
double mem_pct(int64_t peak_bytes, int64_t reference_bytes);

struct ExperimentPlan {
  std::vector<RunMode> modes;
  std::vector<uint64_t> seeds = {1, 2, 3};
  int workers = 1;
  // 0 means "use setup.mem_max" as the score's memory reference.
  int64_t score_mem_reference = 0;
  TrainSetup setup;
};

ExperimentPlan default_plan();
void validate(const ExperimentPlan& plan);

// Flat INI-style text: [section] headers, key = value lines, '#'/';' comments.
// Unknown sections or keys and malformed values are ConfigErrors; parsing is
// fail-fast. serialize_plan emits every key in canonical order, and
// parse -> serialize round-trips byte-identically.
ExperimentPlan parse_plan(const std::string& text);
std::string serialize_plan(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::filesystem::path& path);

struct RunRecord {
  RunMode mode = RunMode::Fp32Baseline;
  uint64_t seed = 0;
  double accuracy_pct = 0.0;
  double sim_time_units = 0.0;
  int64_t peak_mem_bytes = 0;
  double peak_mem_pct = 0.0;
  double score = 0.0;
  bool aborted = false;
  std::string event_log;  // file name inside the output directory
};

struct ModeSummary {
  RunMode mode = RunMode::Fp32Baseline;
  int seed_count = 0;  // completed runs aggregated
  double acc_mean = 0.0, acc_std = 0.0;
  double time_mean = 0.0, time_std = 0.0;
  double peakmem_mean = 0.0, peakmem_std = 0.0;
  double score_mean = 0.0, score_std = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;        // plan order
  std::vector<ModeSummary> summary;   // plan mode order, seeds aggregated sorted
  bool any_aborted = false;
};

// Executes every (mode, seed) pair, writing per-run event logs plus runs.csv,
// summary.csv and plan.resolved into out_dir. The output directory is
// validated before any run starts (IoError otherwise). Deterministic for a
// fixed plan regardless of worker count.
ExperimentResult run_experiment(const ExperimentPlan& plan, const std::filesystem::path& out_dir);

void print_summary(std::ostream& os, const ExperimentResult& result);

// Published reference measurements bundled for the score-formula consistency
// check (`paper-check` subcommand).
struct ReferenceRow {
  const char* dataset;
  const char* arch;
  const char* method;
  double accuracy_pct;
  double time_s;
  double vram_gb;
  double score;  // as printed in the source table
};

std::span<const ReferenceRow> reference_results();

struct ReferenceCheck {
  const ReferenceRow* row;
  double recomputed;
  double abs_diff;
  bool within;
};

std::vector<ReferenceCheck> check_reference_scores(double tolerance = 0.05);

}  // namespace triaccel
