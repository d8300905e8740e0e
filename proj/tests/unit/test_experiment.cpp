#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "triaccel/csv.hpp"
#include "triaccel/errors.hpp"
#include "triaccel/harness.hpp"

using namespace triaccel;

namespace fs = std::filesystem;

namespace {

ExperimentPlan quick_plan() {
  ExperimentPlan plan;
  plan.modes = {RunMode::Fp32Baseline, RunMode::TriAccel};
  plan.seeds = {2, 1};
  plan.setup.loop.total_steps = 110;
  plan.setup.loop.ctrl_period = 50;
  plan.setup.loop.warmup_epochs = 1;
  plan.setup.loop.hidden = {8};
  plan.setup.task.train_samples = 512;
  plan.setup.task.test_samples = 128;
  plan.setup.curv.period_steps = 100;
  plan.setup.curv.probe_batch = 8;
  plan.setup.curv.top_k = 3;
  plan.setup.curv.max_iters = 40;
  plan.setup.curv.tol = 1e-5;
  plan.setup.initial_batch = 16;
  plan.setup.batch.batch_min = 4;
  plan.setup.batch.batch_max = 64;
  plan.setup.mem_overhead_bytes = 4096;
  plan.setup.mem_max = 10000;
  return plan;
}

fs::path fresh_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("experiment writes the full artifact set") {
  const auto plan = quick_plan();
  const fs::path dir = fresh_dir("triaccel_exp_artifacts");
  const auto result = run_experiment(plan, dir);

  CHECK(fs::exists(dir / "plan.resolved"));
  CHECK(fs::exists(dir / "runs.csv"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "events_fp32_baseline_seed1.csv"));
  CHECK(fs::exists(dir / "events_fp32_baseline_seed2.csv"));
  CHECK(fs::exists(dir / "events_tri_accel_seed1.csv"));
  CHECK(fs::exists(dir / "events_tri_accel_seed2.csv"));

  // plan.resolved reparses to an equivalent plan.
  const auto resolved = load_plan(dir / "plan.resolved");
  CHECK(serialize_plan(resolved) == serialize_plan(plan));

  // Runs come back in plan order: modes outer, listed seed order inner.
  REQUIRE(result.runs.size() == 4);
  CHECK(result.runs[0].mode == RunMode::Fp32Baseline);
  CHECK(result.runs[0].seed == 2);
  CHECK(result.runs[1].seed == 1);
  CHECK(result.runs[2].mode == RunMode::TriAccel);

  const auto runs = read_csv(dir / "runs.csv");
  CHECK(runs.header.size() == 9);
  REQUIRE(runs.rows.size() == 4);
  CHECK(runs.rows[0][0] == "fp32_baseline");
  CHECK(runs.rows[0][1] == "2");
  CHECK(runs.rows[3][8] == "events_tri_accel_seed1.csv");

  const auto summary = read_csv(dir / "summary.csv");
  REQUIRE(summary.rows.size() == 2);
  CHECK(summary.rows[0][0] == "fp32_baseline");
  CHECK(summary.rows[1][0] == "tri_accel");
  CHECK(summary.rows[0][1] == "2");  // both seeds aggregated

  // Event logs have one row per executed step.
  const auto events = read_csv(dir / "events_tri_accel_seed1.csv");
  CHECK(static_cast<int>(events.rows.size()) == plan.setup.loop.total_steps);
  CHECK(events.header.front() == "step");
  CHECK(events.header.back() == "curvature_event");

  fs::remove_all(dir);
}

TEST_CASE("stored scores verify against the stored inputs") {
  const auto plan = quick_plan();
  const fs::path dir = fresh_dir("triaccel_exp_scores");
  const auto result = run_experiment(plan, dir);

  const auto runs = read_csv(dir / "runs.csv");
  for (size_t i = 0; i < runs.rows.size(); ++i) {
    const auto& row = runs.rows[i];
    const double acc = std::strtod(row[2].c_str(), nullptr);
    const double time = std::strtod(row[3].c_str(), nullptr);
    const double pct = std::strtod(row[5].c_str(), nullptr);
    const double stored = std::strtod(row[6].c_str(), nullptr);
    const double recomputed = efficiency_score(acc, time, pct);
    CHECK(std::fabs(recomputed - stored) <= 1e-9 * std::max(1.0, std::fabs(stored)));
    // In-memory record agrees with what was serialized.
    CHECK(format_double(result.runs[i].score) == row[6]);
  }
  fs::remove_all(dir);
}

TEST_CASE("experiments are byte-deterministic") {
  const auto plan = quick_plan();
  const fs::path a = fresh_dir("triaccel_exp_det_a");
  const fs::path b = fresh_dir("triaccel_exp_det_b");
  (void)run_experiment(plan, a);
  (void)run_experiment(plan, b);
  for (const char* name : {"plan.resolved", "runs.csv", "summary.csv",
                           "events_tri_accel_seed1.csv", "events_fp32_baseline_seed2.csv"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("summary is invariant to seed listing order") {
  auto plan = quick_plan();
  const fs::path a = fresh_dir("triaccel_exp_perm_a");
  plan.seeds = {2, 1};
  (void)run_experiment(plan, a);
  const fs::path b = fresh_dir("triaccel_exp_perm_b");
  plan.seeds = {1, 2};
  (void)run_experiment(plan, b);

  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  // Per-run event logs are keyed by seed, not position, so they match too.
  CHECK(slurp(a / "events_tri_accel_seed1.csv") == slurp(b / "events_tri_accel_seed1.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("worker pool does not change results") {
  auto plan = quick_plan();
  const fs::path a = fresh_dir("triaccel_exp_workers_a");
  plan.workers = 1;
  (void)run_experiment(plan, a);
  const fs::path b = fresh_dir("triaccel_exp_workers_b");
  plan.workers = 4;
  (void)run_experiment(plan, b);
  for (const char* name : {"runs.csv", "summary.csv", "events_tri_accel_seed2.csv"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("aborted runs carry nan fields and drop out of the summary") {
  auto plan = quick_plan();
  plan.modes = {RunMode::Fp32Baseline};
  plan.seeds = {2};
  plan.setup.loop.activation = Activation::Identity;
  plan.setup.loop.warmup_epochs = 0;
  plan.setup.loop.hidden_init_scale = 4.0;
  plan.setup.loop.output_init_scale = 4.0;
  plan.setup.sched.eta0 = 1e6;

  const fs::path dir = fresh_dir("triaccel_exp_abort");
  const auto result = run_experiment(plan, dir);
  CHECK(result.any_aborted);
  REQUIRE(result.runs.size() == 1);
  CHECK(result.runs[0].aborted);
  CHECK(std::isnan(result.runs[0].score));

  const auto runs = read_csv(dir / "runs.csv");
  CHECK(runs.rows[0][2] == "nan");  // accuracy
  CHECK(runs.rows[0][6] == "nan");  // score
  CHECK(runs.rows[0][7] == "1");    // aborted flag

  const auto summary = read_csv(dir / "summary.csv");
  REQUIRE(summary.rows.size() == 1);
  CHECK(summary.rows[0][1] == "0");    // no completed seeds
  CHECK(summary.rows[0][2] == "nan");  // empty aggregate
  fs::remove_all(dir);
}

TEST_CASE("unwritable output directory fails before any training") {
  const auto plan = quick_plan();
  CHECK_THROWS_AS(run_experiment(plan, "/proc/self/cmdline/sub"), IoError);
}

TEST_CASE("score memory reference overrides the capacity default") {
  auto plan = quick_plan();
  plan.modes = {RunMode::Fp32Baseline};
  plan.seeds = {1};
  const fs::path a = fresh_dir("triaccel_exp_ref_a");
  const auto base = run_experiment(plan, a);

  plan.score_mem_reference = plan.setup.mem_max * 2;
  const fs::path b = fresh_dir("triaccel_exp_ref_b");
  const auto doubled = run_experiment(plan, b);

  CHECK(doubled.runs[0].peak_mem_pct ==
        doctest::Approx(base.runs[0].peak_mem_pct / 2.0).epsilon(1e-12));
  CHECK(doubled.runs[0].score == doctest::Approx(base.runs[0].score * 2.0).epsilon(1e-12));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("plan validation gates the experiment") {
  auto plan = quick_plan();
  plan.modes.clear();
  CHECK_THROWS_AS(run_experiment(plan, fresh_dir("triaccel_exp_bad")), ConfigError);
  plan = quick_plan();
  plan.workers = 0;
  CHECK_THROWS_AS(run_experiment(plan, fresh_dir("triaccel_exp_bad")), ConfigError);
  plan = quick_plan();
  plan.seeds = {3, 3};
  CHECK_THROWS_AS(run_experiment(plan, fresh_dir("triaccel_exp_bad")), ConfigError);
}
