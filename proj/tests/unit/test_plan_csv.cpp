#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>

#include "doctest.h"
#include "support/util.hpp"
#include "triaccel/csv.hpp"
#include "triaccel/errors.hpp"
#include "triaccel/harness.hpp"
#include "triaccel/rng.hpp"

using triaccel::ExperimentPlan;
using triaccel::format_double;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("double formatting round-trips exactly") {
  triaccel::Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    double v;
    if (i % 3 == 0) {
      v = rng.normal() * std::exp(20.0 * (rng.uniform() - 0.5));
    } else if (i % 3 == 1) {
      v = static_cast<double>(rng.next_u64()) / 7.0;
    } else {
      v = rng.uniform();
    }
    const std::string s = format_double(v);
    CHECK(oracle::same_bits(std::strtod(s.c_str(), nullptr), v));
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("frozen artifact headers") {
  CHECK(triaccel::event_csv_header(2) ==
        "step,loss,batch,usage_bytes,prec_l0,prec_l1,lr_l0,lr_l1,curvature_event");
  CHECK(triaccel::runs_csv_header() ==
        "mode,seed,accuracy_pct,sim_time_units,peak_mem_bytes,peak_mem_pct,"
        "efficiency_score,aborted,event_log");
  CHECK(triaccel::summary_csv_header() ==
        "mode,seeds,acc_mean,acc_std,time_mean,time_std,peakmem_mean,peakmem_std,"
        "score_mean,score_std");
}

TEST_CASE("event rows serialize wholly from the event") {
  triaccel::StepEvent ev;
  ev.step = 42;
  ev.loss = 0.5;
  ev.batch = 96;
  ev.usage_bytes = 123456;
  ev.precision = {triaccel::PrecisionMode::Fp16, triaccel::PrecisionMode::Fp32};
  ev.effective_lr = {0.1, 0.025};
  ev.curvature_event = true;
  ev.sim_time_units = 0.0625;
  CHECK(triaccel::event_csv_row(ev) == "42,0.5,96,123456,fp16,fp32,0.1,0.025,1");
  ev.curvature_event = false;
  ev.loss = std::nan("");
  CHECK(triaccel::event_csv_row(ev) == "42,nan,96,123456,fp16,fp32,0.1,0.025,0");
}

TEST_CASE("plan round-trips byte-identically") {
  const ExperimentPlan plan = triaccel::default_plan();
  const std::string text = triaccel::serialize_plan(plan);
  const ExperimentPlan reparsed = triaccel::parse_plan(text);
  CHECK(triaccel::serialize_plan(reparsed) == text);

  // A customized plan still round-trips.
  ExperimentPlan custom = plan;
  custom.modes = {triaccel::RunMode::TriAccel, triaccel::RunMode::Fp32Baseline};
  custom.seeds = {42, 7};
  custom.workers = 3;
  custom.score_mem_reference = 1 << 30;
  custom.setup.loop.hidden = {16, 24, 8};
  custom.setup.sched.tau_low = 3.5e-5;
  custom.setup.task.noise = 1.25;
  const std::string ctext = triaccel::serialize_plan(custom);
  CHECK(triaccel::serialize_plan(triaccel::parse_plan(ctext)) == ctext);
}

TEST_CASE("plan text features: comments, blanks, spacing, crlf") {
  const std::string text =
      "# leading comment\r\n"
      "[experiment]\r\n"
      "modes = tri_accel\n"
      "\n"
      "; another comment style\n"
      "seeds=5,  9\n"
      "[scheduler]\n"
      "   eta0   =   0.25\n";
  const ExperimentPlan plan = triaccel::parse_plan(text);
  REQUIRE(plan.modes.size() == 1);
  CHECK(plan.modes[0] == triaccel::RunMode::TriAccel);
  REQUIRE(plan.seeds.size() == 2);
  CHECK(plan.seeds[0] == 5);
  CHECK(plan.seeds[1] == 9);
  CHECK(plan.setup.sched.eta0 == 0.25);
}

TEST_CASE("plan parsing is fail-fast with line numbers") {
  using triaccel::ConfigError;
  auto message_of = [](const std::string& text) {
    try {
      (void)triaccel::parse_plan(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };

  CHECK_THROWS_AS((void)triaccel::parse_plan("[experiment]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS((void)triaccel::parse_plan("[nope]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS((void)triaccel::parse_plan("x = 1\n"), ConfigError);
  CHECK_THROWS_AS((void)triaccel::parse_plan("[experiment\nmodes = tri_accel\n"), ConfigError);
  CHECK_THROWS_AS((void)triaccel::parse_plan("[experiment]\nworkers = soon\n"), ConfigError);
  CHECK_THROWS_AS((void)triaccel::parse_plan("[experiment]\nmodes = warp_drive\n"), ConfigError);
  CHECK_THROWS_AS((void)triaccel::parse_plan("[loop]\ntotal_steps = 10\ntotal_steps = 20\n"),
                  ConfigError);
  CHECK_THROWS_AS((void)triaccel::parse_plan("[experiment]\nmodes = tri_accel, tri_accel\n"),
                  ConfigError);
  CHECK_THROWS_AS((void)triaccel::parse_plan("[experiment]\nseeds = 1, 1\n"), ConfigError);
  CHECK(message_of("[experiment]\nmodes = tri_accel\nno_equals_here\n").find("line 3") !=
        std::string::npos);
  CHECK(message_of("[loop]\ntotal_steps = 10\ntotal_steps = 20\n").find("line 3") !=
        std::string::npos);
}

TEST_CASE("text file reader and writer raise io errors") {
  const fs::path dir = fresh_dir("triaccel_io_test");
  fs::create_directories(dir);
  const fs::path file = dir / "t.csv";
  triaccel::write_text_file(file, "a,b\n1,2\n");
  const auto table = triaccel::read_csv(file);
  REQUIRE(table.header.size() == 2);
  CHECK(table.header[0] == "a");
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0][1] == "2");

  CHECK_THROWS_AS(triaccel::read_csv(dir / "missing.csv"), triaccel::IoError);
  CHECK_THROWS_AS(triaccel::write_text_file(dir / "no" / "such" / "dir" / "f.txt", "x"),
                  triaccel::IoError);
  CHECK_THROWS_AS(triaccel::load_plan(dir / "missing.plan"), triaccel::IoError);
  fs::remove_all(dir);
}
