#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chemostat/cli/config.hpp"
#include "chemostat/pde_sim.hpp"

namespace chemostat::cli {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2, kExitCompareFail = 3 };

struct RunSummary {
  std::string name;
  double d_star = 0.0;
  double d_used = 0.0;
  double reference = 0.0;
  double final_t = 0.0;
  double final_d = 0.0;
  double final_boundary = 0.0;
  double final_y = 0.0;
  double final_w = 0.0;
  double max_w = 0.0;                ///< max over the run of max |ln(f/f*)|
  std::optional<double> decay_rate;  ///< fitted rate of w over t >= A; empty when degenerate
};

struct RunResult {
  TimeSeries series;
  RunSummary summary;
};

/// Runs the configured simulation. The decay fit always uses every step,
/// independent of the record stride.
RunResult run(const RunConfig& config);

/// step,t,D,f_boundary,y,w,ratio_min,ratio_max with 17 significant digits.
std::string timeseries_csv(const TimeSeries& series);
std::string summary_json(const RunSummary& summary);

/// Output directory: `override_dir` if non-empty, else $CHEMOSTAT_OUT_DIR/<name>
/// if set, else the config's output.dir.
std::string output_dir(const RunConfig& config, const std::string& override_dir);

/// Writes the CSV and summary into `dir` (created if needed); returns the CSV path.
std::string write_outputs(const RunConfig& config, const RunResult& result, const std::string& dir);

struct CompareResult {
  bool pass = false;
  long row = -1;        ///< 1-based data row of the first divergence
  std::string column;
  std::string message;
};

/// Column-wise |a - b| <= tol_abs + tol_rel |b| with b from the golden file.
/// Header and row count must match.
CompareResult compare_csv(const std::string& path, const std::string& golden_path, double tol_rel, double tol_abs);

/// One sweep axis: T, bias, b0, c or theta over a list of values.
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

/// Parses "name=v1,v2,...".
SweepAxis parse_axis(const std::string& spec);

struct SweepRow {
  std::vector<double> point;  ///< one value per axis, in axis order
  std::optional<RunSummary> summary;
  std::string error;
};

/// Cartesian product of the axes, first axis outermost. Runs concurrently on
/// up to `jobs` threads; row order is the product order.
std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<SweepAxis>& axes, int jobs = 1);
std::string sweep_csv(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows);

/// Applies one axis value to a copy of the config.
RunConfig with_axis_value(RunConfig config, const std::string& axis, double value);

/// IDE cross-validation and ergodicity diagnostics for the configured model
/// and initial profile, as a JSON report. `passed` summarises the checks.
struct IdeReport {
  std::string json;
  bool passed = false;
};
IdeReport ide_check(const RunConfig& config);

}  // namespace chemostat::cli
