#include "chemostat/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemostat/errors.hpp"

namespace chemostat {

std::string_view to_string(ControlVariant v) {
  switch (v) {
    case ControlVariant::open_loop:
      return "open_loop";
    case ControlVariant::newborn_feedback:
      return "newborn_feedback";
    case ControlVariant::output_feedback:
      return "output_feedback";
  }
  return "unknown";
}

ControlVariant parse_variant(std::string_view name) {
  if (name == "open_loop") return ControlVariant::open_loop;
  if (name == "newborn_feedback") return ControlVariant::newborn_feedback;
  if (name == "output_feedback") return ControlVariant::output_feedback;
  throw InvalidParameter("unknown controller variant '" + std::string(name) + "'");
}

void ControllerSpec::validate() const {
  if (!(d_min < d_max)) throw InvalidParameter("controller: D_min must be below D_max");
  if (!(period > 0.0)) throw InvalidParameter("controller: T must be positive");
  if (!std::isfinite(d_star_used)) throw InvalidParameter("controller: d_star_used must be finite");
  if (variant != ControlVariant::open_loop && !(reference > 0.0)) {
    throw InvalidParameter("controller: reference must be positive");
  }
}

double ControllerSpec::log_target() const {
  return std::log(reference) - period * d_star_used + log_target_trim;
}

double ControllerSpec::clamp(double d) const { return std::max(d_min, std::min(d_max, d)); }

ControllerSpec ControllerSpec::as_setpoint_shift(double d_true) const {
  ControllerSpec out = *this;
  out.d_star_used = d_true;
  out.reference = reference * std::exp((d_true - d_star_used) * period);
  out.log_target_trim = 0.0;
  // Both targets agree to a few ulps, so the difference is exact (Sterbenz)
  // and adding it back reproduces the original target exactly.
  const double untrimmed = out.log_target();
  out.log_target_trim = log_target() - untrimmed;
  return out;
}

double sample_control(double measurement, const ControllerSpec& spec) {
  if (spec.variant == ControlVariant::open_loop) return spec.clamp(spec.d_star_used);
  if (!(measurement > 0.0) || !std::isfinite(measurement)) {
    std::ostringstream msg;
    msg << "controller measurement must be positive (got " << measurement << ")";
    throw NonPositiveMeasurement(msg.str());
  }
  return spec.clamp((std::log(measurement) - spec.log_target()) / spec.period);
}

long steps_per_period(double period, double step) {
  if (!(period > 0.0) || !(step > 0.0)) throw InvalidParameter("T and h must be positive");
  const double ratio = period / step;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "T/h not integer (T=" << period << ", h=" << step << ")";
    throw InvalidParameter(msg.str());
  }
  return static_cast<long>(n);
}

double hold(HoldState& state, long step, long period_steps, std::optional<double> sample) {
  if (is_sampling_step(step, period_steps)) {
    if (!sample) throw InvalidParameter("hold: sampling step without a fresh sample");
    state.current_d = *sample;
    state.last_sample_step = step;
  }
  return state.current_d;
}

}  // namespace chemostat
