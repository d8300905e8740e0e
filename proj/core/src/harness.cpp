#include "triaccel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "triaccel/csv.hpp"
#include "triaccel/errors.hpp"

namespace triaccel {

double efficiency_score(double accuracy_pct, double time_units, double mem_usage_pct) {
  if (!(time_units > 0.0)) throw ConfigError("efficiency_score: time must be positive");
  if (!(mem_usage_pct > 0.0)) throw ConfigError("efficiency_score: memory must be positive");
  return accuracy_pct / (time_units * mem_usage_pct) * 100.0;
}

double mem_pct(int64_t peak_bytes, int64_t reference_bytes) {
  if (reference_bytes <= 0) throw ConfigError("mem_pct: reference must be positive");
  if (peak_bytes < 0) throw ConfigError("mem_pct: negative peak");
  return 100.0 * static_cast<double>(peak_bytes) / static_cast<double>(reference_bytes);
}

namespace {

std::string event_log_name(RunMode mode, uint64_t seed) {
  return std::string("events_") + to_string(mode) + "_seed" + std::to_string(seed) + ".csv";
}

RunRecord make_record(const ExperimentPlan& plan, RunMode mode, uint64_t seed,
                      const TrainResult& tr) {
  const int64_t ref =
      plan.score_mem_reference > 0 ? plan.score_mem_reference : plan.setup.mem_max;
  RunRecord rec;
  rec.mode = mode;
  rec.seed = seed;
  rec.accuracy_pct = tr.accuracy_pct;
  rec.sim_time_units = tr.sim_time_units;
  rec.peak_mem_bytes = tr.peak_mem_bytes;
  rec.peak_mem_pct = mem_pct(tr.peak_mem_bytes, ref);
  rec.aborted = tr.aborted;
  rec.event_log = event_log_name(mode, seed);
  if (tr.aborted) {
    rec.score = std::numeric_limits<double>::quiet_NaN();
  } else {
    rec.score = efficiency_score(tr.accuracy_pct, tr.sim_time_units, rec.peak_mem_pct);
  }
  return rec;
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // sample std, 0 for n < 2
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.stddev = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / (xs.size() - 1));
  }
  return s;
}

std::string events_to_csv(const TrainResult& tr, int layer_count) {
  std::string text = event_csv_header(layer_count);
  text += '\n';
  for (const StepEvent& ev : tr.events) {
    text += event_csv_row(ev);
    text += '\n';
  }
  return text;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan,
                                const std::filesystem::path& out_dir) {
  validate(plan);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");
  // Fail on an unwritable directory before any run starts.
  write_text_file(out_dir / "plan.resolved", serialize_plan(plan));

  struct Job {
    RunMode mode;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (RunMode mode : plan.modes)
    for (uint64_t seed : plan.seeds) jobs.push_back({mode, seed});

  const int layer_count = static_cast<int>(plan.setup.loop.hidden.size()) + 1;
  std::vector<RunRecord> records(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());

  auto run_one = [&](size_t j) {
    try {
      const TrainResult tr = train(plan.setup, jobs[j].mode, jobs[j].seed);
      write_text_file(out_dir / event_log_name(jobs[j].mode, jobs[j].seed),
                      events_to_csv(tr, layer_count));
      records[j] = make_record(plan, jobs[j].mode, jobs[j].seed, tr);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  };

  const int workers = std::min<int>(plan.workers, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (size_t j = 0; j < jobs.size(); ++j) run_one(j);
  } else {
    std::mutex mu;
    size_t next = 0;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          size_t j;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= jobs.size()) return;
            j = next++;
          }
          run_one(j);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : failures)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  result.runs = std::move(records);
  for (const RunRecord& rec : result.runs) result.any_aborted |= rec.aborted;

  // Aggregate seeds in sorted order so the summary is independent of the
  // order they were listed in.
  for (RunMode mode : plan.modes) {
    std::vector<const RunRecord*> mode_runs;
    for (const RunRecord& rec : result.runs)
      if (rec.mode == mode && !rec.aborted) mode_runs.push_back(&rec);
    std::sort(mode_runs.begin(), mode_runs.end(),
              [](const RunRecord* a, const RunRecord* b) { return a->seed < b->seed; });

    std::vector<double> acc, time, peak, score;
    for (const RunRecord* r : mode_runs) {
      acc.push_back(r->accuracy_pct);
      time.push_back(r->sim_time_units);
      peak.push_back(static_cast<double>(r->peak_mem_bytes));
      score.push_back(r->score);
    }
    ModeSummary s;
    s.mode = mode;
    s.seed_count = static_cast<int>(mode_runs.size());
    const Stats a = stats_of(acc), t = stats_of(time), p = stats_of(peak), sc = stats_of(score);
    s.acc_mean = a.mean;
    s.acc_std = a.stddev;
    s.time_mean = t.mean;
    s.time_std = t.stddev;
    s.peakmem_mean = p.mean;
    s.peakmem_std = p.stddev;
    s.score_mean = sc.mean;
    s.score_std = sc.stddev;
    result.summary.push_back(s);
  }

  std::string runs_csv = runs_csv_header();
  runs_csv += '\n';
  for (const RunRecord& rec : result.runs) {
    runs_csv += runs_csv_row(rec);
    runs_csv += '\n';
  }
  write_text_file(out_dir / "runs.csv", runs_csv);

  std::string summary_csv = summary_csv_header();
  summary_csv += '\n';
  for (const ModeSummary& s : result.summary) {
    summary_csv += summary_csv_row(s);
    summary_csv += '\n';
  }
  write_text_file(out_dir / "summary.csv", summary_csv);

  return result;
}

void print_summary(std::ostream& os, const ExperimentResult& result) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-26s %5s %9s %9s %12s %10s\n", "mode", "n", "acc%",
                "time", "peak_bytes", "score");
  os << buf;
  for (const ModeSummary& s : result.summary) {
    std::snprintf(buf, sizeof buf, "%-26s %5d %6.2f±%-5.2f %6.1f±%-4.1f %9.0f±%-6.0f %7.3f±%-.3f\n",
                  to_string(s.mode), s.seed_count, s.acc_mean, s.acc_std, s.time_mean, s.time_std,
                  s.peakmem_mean, s.peakmem_std, s.score_mean, s.score_std);
    os << buf;
  }
  int aborted = 0;
  for (const RunRecord& r : result.runs) aborted += r.aborted ? 1 : 0;
  if (aborted > 0) os << aborted << " run(s) aborted\n";
}

std::span<const ReferenceRow> reference_results() {
  static const ReferenceRow kRows[] = {
      {"cifar10", "resnet18", "fp32", 77.0, 21.0, 0.35, 10.48},
      {"cifar10", "resnet18", "amp", 77.2, 19.4, 0.32, 12.25},
      {"cifar10", "resnet18", "tri_accel", 78.1, 19.5, 0.31, 12.92},
      {"cifar10", "efficientnet_b0", "fp32", 78.3, 18.5, 0.30, 14.11},
      {"cifar10", "efficientnet_b0", "amp", 78.7, 17.2, 0.26, 17.59},
      {"cifar10", "efficientnet_b0", "tri_accel", 79.4, 16.8, 0.26, 18.17},
      {"cifar100", "resnet18", "fp32", 68.2, 24.3, 0.38, 7.39},
      {"cifar100", "resnet18", "amp", 68.7, 22.8, 0.35, 8.61},
      {"cifar100", "resnet18", "tri_accel", 69.9, 22.4, 0.34, 9.18},
      {"cifar100", "efficientnet_b0", "fp32", 72.8, 21.1, 0.33, 10.46},
      {"cifar100", "efficientnet_b0", "amp", 73.1, 19.6, 0.31, 12.03},
      {"cifar100", "efficientnet_b0", "tri_accel", 74.3, 19.0, 0.29, 13.48},
  };
  return kRows;
}

std::vector<ReferenceCheck> check_reference_scores(double tolerance) {
  std::vector<ReferenceCheck> checks;
  for (const ReferenceRow& row : reference_results()) {
    ReferenceCheck c;
    c.row = &row;
    c.recomputed = efficiency_score(row.accuracy_pct, row.time_s, row.vram_gb * 100.0);
    c.abs_diff = std::fabs(c.recomputed - row.score);
    c.within = c.abs_diff <= tolerance;
    checks.push_back(c);
  }
  return checks;
}

}  // namespace triaccel
