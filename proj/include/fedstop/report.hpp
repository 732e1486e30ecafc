#pragma once

#include <string>
#include <vector>

#include "fedstop/harness.hpp"

namespace fedstop {

// CSV codecs. Doubles are written with %.17g so every value round-trips
// bit-exactly; absent optionals are empty cells.
std::string rounds_csv_header();
std::string to_csv_row(const RoundRecord& r);
std::string summary_csv_header();
std::string to_csv_row(const RunSummary& s);

std::vector<RoundRecord> parse_rounds_csv(const std::string& text);
std::vector<RunSummary> parse_summary_csv(const std::string& text);

// Fixed-width per-cell table: each (method, skew, c, tau, rho) cell averaged
// over its non-failed seeds, comparing the data-free stop against the best
// validation baseline and the full-budget oracle.
std::string comparison_table(const std::vector<RunSummary>& summaries);

// Raw little-endian IEEE-754 doubles in flattening order.
void write_f64(const ParameterVector& v, const std::string& path);
ParameterVector read_f64(const std::string& path);

// Write rounds.csv, summary.csv, comparison.txt, series/<run_id>.acc.csv,
// series/<run_id>.growth.csv, snapshots/<run_id>/r<round>.f64, and (when
// config_json is non-empty) config.json into out_dir. Everything except
// the wall_ms column is byte-identical across reruns of the same config.
void write_outputs(const std::vector<RunResult>& runs, const std::string& out_dir,
                   const std::string& config_json);

// Rebuild comparison.txt and series/ from rounds.csv + summary.csv found in
// dir (snapshots are primary outputs and are left alone). Returns the
// comparison text.
std::string regenerate_report(const std::string& dir);

}  // namespace fedstop
