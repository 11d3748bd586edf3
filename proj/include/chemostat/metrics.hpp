#pragma once

#include <span>
#include <vector>

#include "chemostat/control.hpp"
#include "chemostat/grid.hpp"

namespace chemostat::metrics {

/// max_j |ln(f_j / f*_j)| over every node.
double log_deviation(const AgeProfile& profile, const AgeProfile& f_star);

struct RatioEnvelope {
  double min = 0.0;
  double max = 0.0;
};
RatioEnvelope ratio_envelope(const AgeProfile& profile, const AgeProfile& f_star);

/// Per-period margin and the derived exponential rate of the sampled loop.
struct TheoreticalRates {
  double delta = 0.0;        ///< 0.5 * min{(D_max - d*)T, (d* - D_min)T}
  double delta_tilde = 0.0;  ///< min{delta, eps T}
  double sigma = 0.0;        ///< delta_tilde / (4T)
};

/// `d_star` is the true equilibrium rate (not a biased controller value).
/// Throws DegenerateMargin unless D_min < d_star < D_max.
TheoreticalRates theoretical_rates(double d_star, double period, double d_min, double d_max, double eps);
TheoreticalRates theoretical_rates(const ControllerSpec& spec, double d_star, double eps);

struct DecayFit {
  double rate = 0.0;       ///< negated least-squares slope of ln(value)
  double intercept = 0.0;  ///< least-squares intercept of ln(value)
  int samples = 0;
  bool degenerate = false;
};

/// Samples below this magnitude are excluded from log fits.
inline constexpr double kFitFloor = 1e-12;
inline constexpr int kMinFitSamples = 10;

/// Least-squares fit of ln|values| against times over times >= t_start.
/// Degenerate (rate = +inf) with fewer than kMinFitSamples usable samples.
DecayFit fit_log_linear(std::span<const double> times, std::span<const double> values, double t_start);

/// Decay rate of a log-deviation series w(t).
inline DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> w, double t_start) {
  return fit_log_linear(times, w, t_start);
}

/// Exponential envelope check w(t_i) <= kappa exp(-sigma t_i) with
/// kappa = max_i w(t_i) exp(sigma t_i).
struct EnvelopeCheck {
  double kappa = 0.0;
  double worst_excess = 0.0;  ///< max_i w_i - kappa e^{-sigma t_i}
  bool holds = false;
};
EnvelopeCheck exponential_envelope(std::span<const double> times, std::span<const double> w, double sigma,
                                   double slack = 1e-8);

}  // namespace chemostat::metrics
