#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skewprod/config.hpp"
#include "skewprod/experiments.hpp"
#include "skewprod/lyapunov.hpp"
#include "skewprod/measure.hpp"

namespace skewprod {

inline constexpr const char* kReportSchema = "skewprod.report/1";

/// Identifier baked in at configure time (git revision when available).
const char* build_id();

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

enum class PlotStyle { timeseries, histogram, cdf };
const char* to_string(PlotStyle s);

/// Writes <dir>/<stem>_<style>.csv with headers
///   timeseries: step,x      histogram: bin_left,bin_right,density      cdf: a,empirical,theoretical
/// The record needs columns step + (x | value), left + right + mass, or a + empirical + theoretical.
/// Throws std::invalid_argument on an empty record or a style mismatch.
std::filesystem::path emit_plot_data(const ExperimentRecord& record, PlotStyle style, const std::filesystem::path& dir,
                                     const std::string& stem);

/// Interior bins of a measure as a record with columns left,right,mass; atoms go to the parameters.
ExperimentRecord measure_record(const BinnedMeasure& m);

/// JSON text of {L0, L1, regime, zero_tolerance, minimality:{verdict, clause, Q, tau}}.
std::string regime_json(const RegimeReport& regime, const MinimalityReport& minimality);

struct RunOutcome {
  std::filesystem::path outdir;
  std::vector<std::string> files;  // written file names, report.json last
  std::string report;              // contents of report.json
};

/// Runs one subcommand with the given configuration and writes
/// <outdir>/report.json plus the experiment CSVs. Throws ConfigError when the
/// configuration does not fit the subcommand.
RunOutcome run(RunConfig config, const std::string& command);

/// Re-runs the configuration stored in a report.json; `outdir` overrides the stored one when non-empty.
RunOutcome replay(const std::filesystem::path& report_path, const std::string& outdir = {});

/// Single-line JSON error record for the CLI.
std::string error_record(const std::exception& e);

}  // namespace skewprod
