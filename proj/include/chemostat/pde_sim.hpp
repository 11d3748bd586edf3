#pragma once

#include <functional>
#include <vector>

#include "chemostat/control.hpp"
#include "chemostat/grid.hpp"
#include "chemostat/model.hpp"

namespace chemostat {

/// Per-grid data the time stepper needs, computed once from the model.
struct Discretization {
  AgeGrid grid;
  std::vector<double> cell_mortality;  ///< int over cell j-1 -> j of mu, j = 1..N (index 0 unused)
  std::vector<double> birth_nodes;     ///< k at nodes
  std::vector<double> output_nodes;    ///< p at nodes

  static Discretization build(const ModelParams& params, const AgeGrid& grid);
};

struct SimState {
  long step = 0;
  AgeProfile profile;
  double current_d = 0.0;
  double time() const { return step * profile.step; }
};

struct StepRecord {
  long step = 0;
  double t = 0.0;
  double d = 0.0;
  double f_boundary = 0.0;
  double y = 0.0;
  double w = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
};

struct TimeSeries {
  std::vector<StepRecord> rows;

  std::vector<double> times() const;
  std::vector<double> column(double StepRecord::*field) const;
  const StepRecord& back() const { return rows.back(); }
};

/// Exact characteristic shift by one step: node j takes node j-1 times
/// exp(-int_{(j-1)h}^{jh} mu - D h). Node 0 is left for the renewal step.
AgeProfile transport_step(const SimState& state, const Discretization& disc);

/// int k f over the profile (node 0 not read).
double renewal_boundary(const AgeProfile& profile, const Discretization& disc);

/// int p f over the profile (node 0 not read).
double measured_output(const AgeProfile& profile, const Discretization& disc);

struct SimOptions {
  long stride = 1;  ///< record every stride-th step (the last step is always recorded)
  /// Called once per step after boundary, output and control are known.
  std::function<void(const SimState&, const StepRecord&)> observer;
};

/// Runs steps 0..t_end/h of: renewal boundary, output, sampled control with
/// hold, transport. Throws NonPositiveProfile with the step on any node that
/// becomes <= 0 or non-finite.
TimeSeries run_simulation(const ModelParams& params, const AgeGrid& grid, const Equilibrium& eq,
                          const ControllerSpec& controller, const AgeProfile& f0, double t_end,
                          const SimOptions& options = {});

/// Number of steps for a horizon; throws InvalidParameter unless t_end/h is integer.
long steps_for(double t_end, double step);

}  // namespace chemostat
