#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "triaccel/control_loop.hpp"

namespace triaccel {

struct RunRecord;
struct ModeSummary;

// Shortest exact decimal for round-tripping doubles; non-finite values print
// as "nan"/"inf"/"-inf".
std::string format_double(double v);

// Column sets are frozen; tests pin these headers.
std::string event_csv_header(int layer_count);
std::string event_csv_row(const StepEvent& ev);
std::string runs_csv_header();
std::string runs_csv_row(const RunRecord& rec);
std::string summary_csv_header();
std::string summary_csv_row(const ModeSummary& s);

// Minimal comma-split reader (no quoting; none of our files need it).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace triaccel
