#include "triaccel/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "triaccel/errors.hpp"
#include "triaccel/harness.hpp"

namespace triaccel {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  // Shortest representation that parses back to the same double.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string event_csv_header(int layer_count) {
  std::string h = "step,loss,batch,usage_bytes";
  for (int l = 0; l < layer_count; ++l) h += ",prec_l" + std::to_string(l);
  for (int l = 0; l < layer_count; ++l) h += ",lr_l" + std::to_string(l);
  h += ",curvature_event";
  return h;
}

std::string event_csv_row(const StepEvent& ev) {
  std::string row = std::to_string(ev.step);
  row += ',';
  row += format_double(ev.loss);
  row += ',';
  row += std::to_string(ev.batch);
  row += ',';
  row += std::to_string(ev.usage_bytes);
  for (PrecisionMode m : ev.precision) {
    row += ',';
    row += to_string(m);
  }
  for (double lr : ev.effective_lr) {
    row += ',';
    row += format_double(lr);
  }
  row += ',';
  row += ev.curvature_event ? '1' : '0';
  return row;
}

std::string runs_csv_header() {
  return "mode,seed,accuracy_pct,sim_time_units,peak_mem_bytes,peak_mem_pct,"
         "efficiency_score,aborted,event_log";
}

std::string runs_csv_row(const RunRecord& rec) {
  std::string row = to_string(rec.mode);
  row += ',';
  row += std::to_string(rec.seed);
  row += ',';
  row += format_double(rec.accuracy_pct);
  row += ',';
  row += format_double(rec.sim_time_units);
  row += ',';
  row += std::to_string(rec.peak_mem_bytes);
  row += ',';
  row += format_double(rec.peak_mem_pct);
  row += ',';
  row += format_double(rec.score);
  row += ',';
  row += rec.aborted ? '1' : '0';
  row += ',';
  row += rec.event_log;
  return row;
}

std::string summary_csv_header() {
  return "mode,seeds,acc_mean,acc_std,time_mean,time_std,peakmem_mean,peakmem_std,"
         "score_mean,score_std";
}

std::string summary_csv_row(const ModeSummary& s) {
  std::string row = to_string(s.mode);
  row += ',';
  row += std::to_string(s.seed_count);
  for (double v : {s.acc_mean, s.acc_std, s.time_mean, s.time_std, s.peakmem_mean,
                   s.peakmem_std, s.score_mean, s.score_std}) {
    row += ',';
    row += format_double(v);
  }
  return row;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = split(line);
      first = false;
    } else {
      table.rows.push_back(split(line));
    }
  }
  if (first) throw IoError("empty CSV '" + path.string() + "'");
  return table;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace triaccel
