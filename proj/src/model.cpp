#include "chemostat/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemostat/errors.hpp"
#include "chemostat/quadrature.hpp"

namespace chemostat {

namespace {

constexpr int kMaxBisection = 200;
constexpr double kCompatTol = 1e-9;
// Upper bound on sub-cell width used for model integrals, as a fraction of A.
constexpr int kRefinePieces = 512;

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    std::ostringstream msg;
    msg << "model." << field << ": " << what;
    throw InvalidParameter(msg.str());
  }
}

void check_table(const PiecewiseLinear& f, double horizon, const char* field) {
  require(!f.knots().empty(), field, "missing");
  require(std::abs(f.knots().back() - horizon) <= 1e-12 * horizon, field, "must span [0, A]");
  require(f.min_value() >= 0.0, field, "must be nonnegative");
}

// Sorted union of the knots of a and b plus a uniform subdivision.
std::vector<double> integration_nodes(const PiecewiseLinear& a, const PiecewiseLinear& b, double horizon) {
  std::vector<double> pts(a.knots().begin(), a.knots().end());
  pts.insert(pts.end(), b.knots().begin(), b.knots().end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [&](double x, double y) { return std::abs(x - y) <= 1e-14 * horizon; }),
            pts.end());
  const double max_width = horizon / kRefinePieces;
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const int pieces = std::max(1, static_cast<int>(std::ceil((pts[i + 1] - pts[i]) / max_width - 1e-9)));
    for (int s = 0; s < pieces; ++s) out.push_back(pts[i] + (pts[i + 1] - pts[i]) * s / pieces);
  }
  out.push_back(pts.back());
  return out;
}

// Composite Simpson of k*f0 over every linear piece of k; independent of the
// exponential-fit rules.
double simpson_modulus_product(const PiecewiseLinear& k, const InitialFamily& f0) {
  constexpr int n = 256;
  double acc = 0.0;
  const auto knots = k.knots();
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a0 = knots[i];
    const double width = (knots[i + 1] - a0) / n;
    double s = 0.0;
    for (int m = 0; m <= n; ++m) {
      const double a = a0 + m * width;
      const double coef = (m == 0 || m == n) ? 1.0 : (m % 2 ? 4.0 : 2.0);
      s += coef * k(a) * f0(a);
    }
    acc += s * width / 3.0;
  }
  return acc;
}

}  // namespace

void ModelParams::validate() const {
  require(horizon > 0.0 && std::isfinite(horizon), "A", "must be positive");
  require(period > 0.0 && std::isfinite(period), "T", "must be positive");
  require(d_min > 0.0, "D_min", "must be positive");
  require(d_max > d_min, "D_max", "must exceed D_min");
  require(scale > 0.0 && std::isfinite(scale), "M", "must be positive");
  check_table(mortality, horizon, "mu");
  check_table(birth_modulus, horizon, "k");
  check_table(output_weight, horizon, "p");
  require(birth_modulus.integral() > 0.0, "k", "integral must be positive");
  require(output_weight.integral() > 0.0, "p", "integral must be positive");
}

double triangular_birth_scale(double mortality, double d_star, double horizon) {
  if (mortality < 0.0 || d_star < 0.0 || !(horizon > 0.0)) {
    throw InvalidParameter("triangular_birth_scale: rates must be nonnegative and horizon positive");
  }
  const double rate = mortality + d_star;
  const double half = 0.5 * horizon;
  if (rate == 0.0) return 1.0 / (half * half);
  // int_0^A min(a, A-a) e^{-rate a} da = ((1 - e^{-rate A/2}) / rate)^2
  const double q = -std::expm1(-rate * half) / rate;
  return 1.0 / (q * q);
}

ModelParams reference_params() {
  ModelParams p;
  p.horizon = 2.0;
  p.mortality = PiecewiseLinear::constant(0.1, 2.0);
  p.birth_modulus = PiecewiseLinear::triangular(triangular_birth_scale(0.1, 1.0, 2.0), 2.0);
  p.output_weight = PiecewiseLinear::constant(1.0, 2.0);
  p.d_min = 0.5;
  p.d_max = 1.5;
  p.period = 0.4;
  p.scale = 1.0;
  return p;
}

double survival_weighted_integral(const PiecewiseLinear& weight, const PiecewiseLinear& mortality, double rate) {
  const double horizon = weight.knots().back();
  const auto nodes = integration_nodes(weight, mortality, horizon);
  double acc = 0.0;
  double a_prev = nodes.front();
  double e_prev = std::exp(-rate * a_prev - mortality.integral_to(a_prev));
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double a = nodes[i];
    const double e = std::exp(-rate * a - mortality.integral_to(a));
    acc += quadrature::cell_linear_weight({e_prev, e, 0, a - a_prev}, weight(a_prev), weight(a));
    a_prev = a;
    e_prev = e;
  }
  return acc;
}

double lotka_sharpe_residual(double dilution, const ModelParams& params) {
  return 1.0 - survival_weighted_integral(params.birth_modulus, params.mortality, dilution);
}

Equilibrium equilibrium_at(double d_star, const ModelParams& params, const AgeGrid& grid) {
  Equilibrium eq;
  eq.d_star = d_star;
  const auto cum_mu = cumulative_at_nodes(params.mortality, grid);
  eq.f_star.step = grid.step();
  eq.f_star.values.resize(static_cast<std::size_t>(grid.nodes()));
  for (int j = 0; j < grid.nodes(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    eq.f_star.values[ju] = params.scale * std::exp(-d_star * grid.age(j) - cum_mu[ju]);
  }
  eq.beta = survival_weighted_integral(params.output_weight, params.mortality, d_star);
  eq.y_star = params.scale * eq.beta;
  return eq;
}

Equilibrium solve_d_star(const ModelParams& params, const AgeGrid& grid) {
  params.validate();
  double lo = params.d_min;
  double hi = params.d_max;
  const double r_lo = lotka_sharpe_residual(lo, params);
  const double r_hi = lotka_sharpe_residual(hi, params);
  if (!(r_lo < 0.0 && r_hi > 0.0)) {
    std::ostringstream msg;
    msg << "Lotka-Sharpe residual does not change sign on [" << lo << ", " << hi << "] (" << r_lo << ", " << r_hi
        << ")";
    throw NoRootInBracket(msg.str());
  }
  // Bisect to the resolution of double rather than stopping at a residual
  // threshold: the discrete equilibrium is only a fixed point to the
  // accuracy of d_star.
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = lotka_sharpe_residual(mid, params);
    if (r == 0.0) {
      lo = hi = mid;
      break;
    }
    (r < 0.0 ? lo : hi) = mid;
  }
  const double r_lo_end = std::abs(lotka_sharpe_residual(lo, params));
  const double r_hi_end = std::abs(lotka_sharpe_residual(hi, params));
  return equilibrium_at(r_lo_end <= r_hi_end ? lo : hi, params, grid);
}

double InitialFamily::operator()(double a) const { return b0 - b1 * a + c * std::exp(-theta * a); }

AgeProfile InitialFamily::sample(const AgeGrid& grid) const {
  AgeProfile out;
  out.step = grid.step();
  out.values.resize(static_cast<std::size_t>(grid.nodes()));
  for (int j = 0; j < grid.nodes(); ++j) out.values[static_cast<std::size_t>(j)] = (*this)(grid.age(j));
  return out;
}

double tent_initial_slope(double b0, double c, double theta, double g) {
  const double q = -std::expm1(-theta);
  return (g - 1.0) / g * b0 + c * q * q / (theta * theta) - c / g;
}

InitialFamily make_initial_family(double b0, double c, double theta, const ModelParams& params) {
  if (!(b0 > 0.0) || !(c > 0.0) || !(theta > 0.0)) {
    throw InvalidParameter("initial family needs b0, c, theta > 0");
  }
  const PiecewiseLinear& k = params.birth_modulus;
  const PiecewiseLinear zero = PiecewiseLinear::constant(0.0, params.horizon);
  // Moments of k: int k, int a k (exact for linear pieces), int k e^{-theta a}.
  const double k0 = k.integral();
  double k1 = 0.0;
  const auto knots = k.knots();
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double x0 = knots[i];
    const double x1 = knots[i + 1];
    const double xm = 0.5 * (x0 + x1);
    k1 += (x1 - x0) / 6.0 * (x0 * k(x0) + 4.0 * xm * k(xm) + x1 * k(x1));
  }
  const double k_theta = survival_weighted_integral(k, zero, theta);
  if (!(k1 > 0.0)) throw InvalidParameter("initial family: int a k(a) da must be positive");

  InitialFamily fam{b0, c, theta, 0.0};
  fam.b1 = (b0 * k0 + c * k_theta - b0 - c) / k1;

  // f0 is convex (c > 0), so its minimum is at an end point or the stationary point.
  double min_val = std::min(fam(0.0), fam(params.horizon));
  if (fam.b1 > 0.0) {
    const double a_stat = std::log(c * theta / fam.b1) / theta;
    if (a_stat > 0.0 && a_stat < params.horizon) min_val = std::min(min_val, fam(a_stat));
  }
  if (!(min_val > 0.0)) {
    std::ostringstream msg;
    msg << "initial profile is not positive on [0, A] (min " << min_val << ", b1 = " << fam.b1 << ")";
    throw NonPositiveProfile(msg.str(), -1, -1);
  }

  const double renewal = simpson_modulus_product(k, fam);
  const double boundary = fam(0.0);
  if (std::abs(boundary - renewal) > kCompatTol * boundary) {
    std::ostringstream msg;
    msg << "initial profile violates f0(0) = int k f0 (" << boundary << " vs " << renewal << ")";
    throw IncompatibleBoundary(msg.str());
  }
  return fam;
}

AgeProfile make_initial_profile(double b0, double c, double theta, const ModelParams& params, const AgeGrid& grid) {
  return make_initial_family(b0, c, theta, params).sample(grid);
}

AgeProfile profile_from_table(std::vector<double> values, const ModelParams& params, const AgeGrid& grid,
                              double rel_tol) {
  if (static_cast<int>(values.size()) != grid.nodes()) {
    std::ostringstream msg;
    msg << "initial table has " << values.size() << " values, grid has " << grid.nodes() << " nodes";
    throw InvalidParameter(msg.str());
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!(values[j] > 0.0) || !std::isfinite(values[j])) {
      throw NonPositiveProfile("initial table value is not positive", -1, static_cast<long>(j));
    }
  }
  AgeProfile profile{grid.step(), std::move(values)};
  const double renewal = quadrature::integrate_profile(profile, params.birth_modulus.sample_aligned(grid));
  if (std::abs(profile.values[0] - renewal) > rel_tol * profile.values[0]) {
    std::ostringstream msg;
    msg << "initial table violates f0(0) = int k f0 (" << profile.values[0] << " vs " << renewal << ")";
    throw IncompatibleBoundary(msg.str());
  }
  return profile;
}

AgeProfile make_compatible(AgeProfile profile, const ModelParams& params, const AgeGrid& grid) {
  profile.values[0] = quadrature::integrate_profile(profile, params.birth_modulus.sample_aligned(grid));
  return profile;
}

}  // namespace chemostat
