#include "chemostat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chemostat/errors.hpp"

namespace chemostat::metrics {

namespace {

void check_pair(const AgeProfile& profile, const AgeProfile& f_star) {
  if (profile.values.size() != f_star.values.size()) {
    throw InvalidParameter("profile and equilibrium grids differ");
  }
  for (std::size_t j = 0; j < profile.values.size(); ++j) {
    if (!(profile.values[j] > 0.0) || !std::isfinite(profile.values[j])) {
      std::ostringstream msg;
      msg << "profile value at node " << j << " is not positive (" << profile.values[j] << ")";
      throw NonPositiveProfile(msg.str(), -1, static_cast<long>(j));
    }
  }
}

}  // namespace

double log_deviation(const AgeProfile& profile, const AgeProfile& f_star) {
  check_pair(profile, f_star);
  double w = 0.0;
  for (std::size_t j = 0; j < profile.values.size(); ++j) {
    w = std::max(w, std::abs(std::log(profile.values[j] / f_star.values[j])));
  }
  return w;
}

RatioEnvelope ratio_envelope(const AgeProfile& profile, const AgeProfile& f_star) {
  check_pair(profile, f_star);
  RatioEnvelope env{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t j = 0; j < profile.values.size(); ++j) {
    const double r = profile.values[j] / f_star.values[j];
    env.min = std::min(env.min, r);
    env.max = std::max(env.max, r);
  }
  return env;
}

TheoreticalRates theoretical_rates(double d_star, double period, double d_min, double d_max, double eps) {
  if (!(d_min < d_star && d_star < d_max)) {
    std::ostringstream msg;
    msg << "d* = " << d_star << " is not strictly inside [" << d_min << ", " << d_max << "]";
    throw DegenerateMargin(msg.str());
  }
  if (!(eps > 0.0)) throw InvalidParameter("theoretical_rates: eps must be positive");
  TheoreticalRates r;
  r.delta = 0.5 * std::min((d_max - d_star) * period, (d_star - d_min) * period);
  r.delta_tilde = std::min(r.delta, eps * period);
  r.sigma = r.delta_tilde / (4.0 * period);
  return r;
}

TheoreticalRates theoretical_rates(const ControllerSpec& spec, double d_star, double eps) {
  return theoretical_rates(d_star, spec.period, spec.d_min, spec.d_max, eps);
}

DecayFit fit_log_linear(std::span<const double> times, std::span<const double> values, double t_start) {
  if (times.size() != values.size()) throw InvalidParameter("fit: times and values differ in length");
  double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double v = std::abs(values[i]);
    if (times[i] < t_start || !(v >= kFitFloor) || !std::isfinite(v)) continue;
    const double y = std::log(v);
    n += 1.0;
    sx += times[i];
    sy += y;
    sxx += times[i] * times[i];
    sxy += times[i] * y;
  }
  DecayFit fit;
  fit.samples = static_cast<int>(n);
  const double denom = n * sxx - sx * sx;
  if (fit.samples < kMinFitSamples || !(denom > 0.0)) {
    fit.degenerate = true;
    fit.rate = std::numeric_limits<double>::infinity();
    return fit;
  }
  const double slope = (n * sxy - sx * sy) / denom;
  fit.rate = -slope;
  fit.intercept = (sy - slope * sx) / n;
  return fit;
}

EnvelopeCheck exponential_envelope(std::span<const double> times, std::span<const double> w, double sigma,
                                   double slack) {
  if (times.size() != w.size()) throw InvalidParameter("envelope: times and values differ in length");
  EnvelopeCheck out;
  for (std::size_t i = 0; i < times.size(); ++i) out.kappa = std::max(out.kappa, w[i] * std::exp(sigma * times[i]));
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    out.worst_excess = std::max(out.worst_excess, w[i] - out.kappa * std::exp(-sigma * times[i]));
  }
  out.holds = std::isfinite(out.kappa) && out.worst_excess <= slack;
  return out;
}

}  // namespace chemostat::metrics
