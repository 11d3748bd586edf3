#pragma once

// JSON run configuration.
//
//   {
//     "name": "sim1",
//     "model": {
//       "A": 2.0,
//       "mu": 0.1 | {"knots": [...], "values": [...]},
//       "k":  {"triangular": g} | {"knots": [...], "values": [...]},
//       "p":  1.0 | {"knots": [...], "values": [...]},
//       "D_min": 0.5, "D_max": 1.5, "T": 0.4, "M": 1.0
//     },
//     "grid": {"h": 0.04, "t_end": 40.0},
//     "controller": {"variant": "output_feedback", "d_star_used": "auto" | number, "bias": 1.0},
//     "initial": {"b0": 0.2, "c": 0.8, "theta": 1.0} | {"table": [...]} | {"equilibrium": true},
//     "output": {"dir": "out/sim1", "csv": "timeseries.csv", "summary": "summary.json", "stride": 1}
//   }
//
// The controller uses d_star_used * bias, where "auto" is the solved D*.
// Every key is required except "name", "controller.bias" (1) and the
// "output" block (defaults shown).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chemostat/control.hpp"
#include "chemostat/errors.hpp"
#include "chemostat/grid.hpp"
#include "chemostat/model.hpp"

namespace chemostat::cli {

class ConfigParseError : public Error {
 public:
  using Error::Error;
};

/// Carries the dotted path of the offending field, e.g. "model.D_min".
class ConfigValidationError : public Error {
 public:
  ConfigValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct Table {
  std::vector<double> knots;
  std::vector<double> values;
};

struct ModelBlock {
  double horizon = 2.0;
  Table mortality;
  std::optional<double> triangular_scale;  ///< set for the tent modulus
  Table birth;                             ///< used when triangular_scale is empty
  Table output_weight;
  double d_min = 0.5;
  double d_max = 1.5;
  double period = 0.4;
  double scale = 1.0;
};

struct GridBlock {
  double step = 0.04;
  double t_end = 40.0;
};

struct ControllerBlock {
  ControlVariant variant = ControlVariant::output_feedback;
  std::optional<double> d_star_used;  ///< empty means "auto"
  double bias = 1.0;
};

struct InitialBlock {
  enum class Kind { family, table, equilibrium };
  Kind kind = Kind::family;
  double b0 = 0.0;
  double c = 0.0;
  double theta = 0.0;
  std::vector<double> table;
};

struct OutputBlock {
  std::string dir = "out";
  std::string csv = "timeseries.csv";
  std::string summary = "summary.json";
  long stride = 1;
};

struct RunConfig {
  std::string name = "run";
  ModelBlock model;
  GridBlock grid;
  ControllerBlock controller;
  InitialBlock initial;
  OutputBlock output;

  bool operator==(const RunConfig&) const = default;
};

inline bool operator==(const Table& a, const Table& b) { return a.knots == b.knots && a.values == b.values; }
inline bool operator==(const ModelBlock& a, const ModelBlock& b) {
  return a.horizon == b.horizon && a.mortality == b.mortality && a.triangular_scale == b.triangular_scale &&
         a.birth == b.birth && a.output_weight == b.output_weight && a.d_min == b.d_min && a.d_max == b.d_max &&
         a.period == b.period && a.scale == b.scale;
}
inline bool operator==(const GridBlock& a, const GridBlock& b) { return a.step == b.step && a.t_end == b.t_end; }
inline bool operator==(const ControllerBlock& a, const ControllerBlock& b) {
  return a.variant == b.variant && a.d_star_used == b.d_star_used && a.bias == b.bias;
}
inline bool operator==(const InitialBlock& a, const InitialBlock& b) {
  return a.kind == b.kind && a.b0 == b.b0 && a.c == b.c && a.theta == b.theta && a.table == b.table;
}
inline bool operator==(const OutputBlock& a, const OutputBlock& b) {
  return a.dir == b.dir && a.csv == b.csv && a.summary == b.summary && a.stride == b.stride;
}

/// Everything a simulation needs, derived from a config.
struct ResolvedRun {
  ModelParams params;
  AgeGrid grid;
  Equilibrium equilibrium;
  ControllerSpec controller;
  AgeProfile initial;
};

/// Throws ConfigParseError on malformed JSON, ConfigValidationError otherwise.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
/// Pretty-printed JSON; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Builds model, grid, equilibrium, controller and f0; every failure is
/// reported as ConfigValidationError with a field path.
ResolvedRun resolve(const RunConfig& config);

/// Frozen scenario presets: sim1, sim2, sim3_newborn, sim3_output, openloop.
std::vector<std::string> preset_names();
/// Throws ConfigValidationError("preset", ...) for unknown names.
RunConfig preset(std::string_view name);

}  // namespace chemostat::cli
