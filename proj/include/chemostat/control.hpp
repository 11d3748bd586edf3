#pragma once

#include <optional>
#include <string_view>

namespace chemostat {

enum class ControlVariant { open_loop, newborn_feedback, output_feedback };

std::string_view to_string(ControlVariant v);
/// Accepts "open_loop", "newborn_feedback", "output_feedback"; throws InvalidParameter.
ControlVariant parse_variant(std::string_view name);

/// Sampled dilution law D = clamp(d_star_used + ln(measurement/reference)/T).
///
/// The law only depends on the log target ln(reference) - T*d_star_used, so a
/// bias in d_star_used is the same controller as a shifted reference.
struct ControllerSpec {
  ControlVariant variant = ControlVariant::output_feedback;
  double d_star_used = 1.0;
  double reference = 1.0;  ///< f*(0) for newborn feedback, y* for output feedback
  double period = 0.4;
  double d_min = 0.5;
  double d_max = 1.5;
  /// Exact rounding correction added to log_target(); zero unless the spec
  /// came from as_setpoint_shift.
  double log_target_trim = 0.0;

  void validate() const;
  double log_target() const;
  double clamp(double d) const;
  /// Same law written with `d_true` and the reference scaled by
  /// exp((d_true - d_star_used) T); log_target_trim absorbs the rounding so
  /// log_target(), and with it every control output, is bit-identical.
  ControllerSpec as_setpoint_shift(double d_true) const;
};

/// One sample of the feedback law. Throws NonPositiveMeasurement for feedback
/// variants when measurement <= 0.
double sample_control(double measurement, const ControllerSpec& spec);

struct HoldState {
  double current_d = 0.0;
  long last_sample_step = -1;
};

/// Number of grid steps per sampling period; throws InvalidParameter unless
/// period/step is a positive integer.
long steps_per_period(double period, double step);

/// Zero-order hold: at steps with i % period_steps == 0 stores `sample`
/// (required there), otherwise keeps the previous value.
double hold(HoldState& state, long step, long period_steps, std::optional<double> sample);

inline bool is_sampling_step(long step, long period_steps) { return step % period_steps == 0; }

}  // namespace chemostat
