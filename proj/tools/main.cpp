#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "triaccel/csv.hpp"
#include "triaccel/errors.hpp"
#include "triaccel/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;
constexpr int kExitIo = 4;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int cmd_run(const std::string& plan_path, const std::string& out_dir,
            const std::string& seeds_arg, const std::string& modes_arg) {
  triaccel::ExperimentPlan plan =
      plan_path.empty() ? triaccel::default_plan() : triaccel::load_plan(plan_path);

  if (!seeds_arg.empty()) {
    plan.seeds.clear();
    for (const std::string& s : split_commas(seeds_arg)) plan.seeds.push_back(std::stoull(s));
  }
  if (!modes_arg.empty()) {
    plan.modes.clear();
    for (const std::string& m : split_commas(modes_arg))
      plan.modes.push_back(triaccel::run_mode_from_string(m));
  }

  const triaccel::ExperimentResult result = triaccel::run_experiment(plan, out_dir);
  triaccel::print_summary(std::cout, result);
  std::cout << "artifacts written to " << out_dir << "\n";
  return result.any_aborted ? kExitAborted : kExitOk;
}

int cmd_score(const std::string& in_path, long long mem_ref) {
  const triaccel::CsvTable table = triaccel::read_csv(in_path);
  const auto& h = table.header;

  if (!h.empty() && h[0] == "mode" && h.size() >= 7 && h[2] == "accuracy_pct") {
    // runs.csv: verify each stored score against a recomputation.
    bool all_ok = true;
    for (const auto& row : table.rows) {
      const double acc = std::strtod(row[2].c_str(), nullptr);
      const double time = std::strtod(row[3].c_str(), nullptr);
      const double pct = std::strtod(row[5].c_str(), nullptr);
      const double stored = std::strtod(row[6].c_str(), nullptr);
      if (row[7] == "1") {
        std::printf("%-26s seed %-6s aborted\n", row[0].c_str(), row[1].c_str());
        continue;
      }
      const double recomputed = triaccel::efficiency_score(acc, time, pct);
      const bool ok = std::fabs(recomputed - stored) <= 1e-9 * std::max(1.0, std::fabs(stored));
      all_ok &= ok;
      std::printf("%-26s seed %-6s score %-12s recomputed %s %s\n", row[0].c_str(),
                  row[1].c_str(), row[6].c_str(), triaccel::format_double(recomputed).c_str(),
                  ok ? "ok" : "MISMATCH");
    }
    return all_ok ? kExitOk : 1;
  }

  if (!h.empty() && h[0] == "mode" && h.size() >= 10 && h[2] == "acc_mean") {
    // summary.csv: derive a score-of-means column for reference.
    for (const auto& row : table.rows) {
      const double acc = std::strtod(row[2].c_str(), nullptr);
      const double time = std::strtod(row[4].c_str(), nullptr);
      const double peak = std::strtod(row[6].c_str(), nullptr);
      if (mem_ref <= 0)
        throw triaccel::ConfigError("summary input needs --mem-ref to convert bytes to percent");
      const double pct = triaccel::mem_pct(static_cast<int64_t>(peak), mem_ref);
      const double score = triaccel::efficiency_score(acc, time, pct);
      std::printf("%-26s acc %6.2f time %8.2f mem %6.2f%% score-of-means %.4f\n", row[0].c_str(),
                  acc, time, pct, score);
    }
    return kExitOk;
  }

  throw triaccel::ConfigError("unrecognized CSV header in '" + in_path + "'");
}

int cmd_paper_check() {
  const auto checks = triaccel::check_reference_scores();
  int failures = 0;
  for (const auto& c : checks) {
    std::printf("%-9s %-16s %-10s printed %6.2f recomputed %7.4f |d|=%.4f %s\n", c.row->dataset,
                c.row->arch, c.row->method, c.row->score, c.recomputed, c.abs_diff,
                c.within ? "ok" : "OUT OF TOLERANCE");
    failures += c.within ? 0 : 1;
  }
  if (failures) {
    std::printf("%d of %zu reference rows disagree with the score formula beyond 0.05\n",
                failures, checks.size());
    return 1;
  }
  std::printf("all %zu reference rows consistent within 0.05\n", checks.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tri-accel training controller harness"};
  app.require_subcommand(1);

  std::string plan_path, out_dir = "triaccel_out", seeds_arg, modes_arg;
  CLI::App* run = app.add_subcommand("run", "execute an experiment plan");
  run->add_option("--plan", plan_path, "plan file (INI-style); defaults apply when omitted");
  run->add_option("--out", out_dir, "output directory for CSV artifacts");
  run->add_option("--seeds", seeds_arg, "comma-separated seed list overriding the plan");
  run->add_option("--mode", modes_arg, "comma-separated mode list overriding the plan");

  std::string score_in;
  long long mem_ref = 0;
  CLI::App* score = app.add_subcommand("score", "recompute scores from a runs/summary CSV");
  score->add_option("--in", score_in, "runs.csv or summary.csv")->required();
  score->add_option("--mem-ref", mem_ref, "memory reference in bytes (summary input)");

  CLI::App* paper =
      app.add_subcommand("paper-check", "verify the bundled reference-results table");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(plan_path, out_dir, seeds_arg, modes_arg);
    if (score->parsed()) return cmd_score(score_in, mem_ref);
    if (paper->parsed()) return cmd_paper_check();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const triaccel::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const triaccel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
