#include "chemostat/pde_sim.hpp"

#include <cmath>
#include <sstream>

#include "chemostat/errors.hpp"
#include "chemostat/metrics.hpp"
#include "chemostat/quadrature.hpp"

namespace chemostat {

Discretization Discretization::build(const ModelParams& params, const AgeGrid& grid) {
  Discretization d;
  d.grid = grid;
  const auto cum = cumulative_at_nodes(params.mortality, grid);
  d.cell_mortality.assign(cum.size(), 0.0);
  for (std::size_t j = 1; j < cum.size(); ++j) d.cell_mortality[j] = cum[j] - cum[j - 1];
  d.birth_nodes = params.birth_modulus.sample_aligned(grid);
  d.output_nodes = params.output_weight.sample_aligned(grid);
  return d;
}

std::vector<double> TimeSeries::times() const { return column(&StepRecord::t); }

std::vector<double> TimeSeries::column(double StepRecord::*field) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.*field);
  return out;
}

AgeProfile transport_step(const SimState& state, const Discretization& disc) {
  const auto& in = state.profile.values;
  const double h = state.profile.step;
  AgeProfile out{h, std::vector<double>(in.size(), 0.0)};
  for (std::size_t j = 1; j < in.size(); ++j) {
    out.values[j] = in[j - 1] * std::exp(-disc.cell_mortality[j] - state.current_d * h);
  }
  return out;
}

double renewal_boundary(const AgeProfile& profile, const Discretization& disc) {
  return quadrature::integrate_profile(profile, disc.birth_nodes);
}

double measured_output(const AgeProfile& profile, const Discretization& disc) {
  return quadrature::integrate_profile(profile, disc.output_nodes);
}

long steps_for(double t_end, double step) {
  if (!(t_end >= 0.0) || !(step > 0.0)) throw InvalidParameter("t_end must be >= 0 and h > 0");
  const double ratio = t_end / step;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "t_end/h not integer (t_end=" << t_end << ", h=" << step << ")";
    throw InvalidParameter(msg.str());
  }
  return static_cast<long>(n);
}

namespace {

void check_nodes(const AgeProfile& p, long step, std::size_t first = 0) {
  for (std::size_t j = first; j < p.values.size(); ++j) {
    const double v = p.values[j];
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "numerical abort at step " << step << ", node " << j << ": value " << v;
      throw NonPositiveProfile(msg.str(), step, static_cast<long>(j));
    }
  }
}

}  // namespace

TimeSeries run_simulation(const ModelParams& params, const AgeGrid& grid, const Equilibrium& eq,
                          const ControllerSpec& controller, const AgeProfile& f0, double t_end,
                          const SimOptions& options) {
  controller.validate();
  if (static_cast<int>(f0.values.size()) != grid.nodes() || eq.f_star.values.size() != f0.values.size()) {
    throw InvalidParameter("initial profile, equilibrium and grid sizes differ");
  }
  if (options.stride < 1) throw InvalidParameter("record stride must be >= 1");
  const Discretization disc = Discretization::build(params, grid);
  const long period_steps = steps_per_period(controller.period, grid.step());
  const long n_steps = steps_for(t_end, grid.step());

  SimState state;
  state.profile = f0;
  state.profile.step = grid.step();
  HoldState hold_state;
  TimeSeries series;
  series.rows.reserve(static_cast<std::size_t>(n_steps / options.stride + 2));

  for (long i = 0; i <= n_steps; ++i) {
    state.step = i;
    // node 0 is regenerated from the interior nodes; f0(0) is never read
    if (i == 0) check_nodes(state.profile, i, 1);
    const double boundary = renewal_boundary(state.profile, disc);
    state.profile.values[0] = boundary;
    check_nodes(state.profile, i);
    const double y = measured_output(state.profile, disc);

    std::optional<double> sample;
    if (is_sampling_step(i, period_steps)) {
      const double measurement = controller.variant == ControlVariant::newborn_feedback ? boundary : y;
      sample = sample_control(measurement, controller);
    }
    state.current_d = hold(hold_state, i, period_steps, sample);

    StepRecord rec;
    rec.step = i;
    rec.t = static_cast<double>(i) * grid.step();
    rec.d = state.current_d;
    rec.f_boundary = boundary;
    rec.y = y;
    rec.w = metrics::log_deviation(state.profile, eq.f_star);
    const auto env = metrics::ratio_envelope(state.profile, eq.f_star);
    rec.ratio_min = env.min;
    rec.ratio_max = env.max;
    if (i % options.stride == 0 || i == n_steps) series.rows.push_back(rec);
    if (options.observer) options.observer(state, rec);

    if (i < n_steps) {
      state.profile = transport_step(state, disc);
      // node 0 is filled at the top of the next step
      check_nodes(state.profile, i + 1, 1);
    }
  }
  return series;
}

}  // namespace chemostat
