#include "chemostat/quadrature.hpp"

#include <cmath>
#include <sstream>

#include "chemostat/errors.hpp"

namespace chemostat::quadrature {

namespace {

double log_ratio(double f_left, double f_right) {
  if (!(f_left > 0.0) || !(f_right > 0.0) || !std::isfinite(f_left) || !std::isfinite(f_right)) {
    std::ostringstream msg;
    msg << "quadrature sample must be positive and finite (got " << f_left << ", " << f_right << ")";
    throw NonPositiveSample(msg.str());
  }
  return std::log(f_right / f_left);
}

void check_cell(const CellSample& s) {
  if (!(s.h > 0.0)) throw InvalidParameter("cell step must be positive");
}

// Virtual boundary value of the exponential through (h, f_h), (2h, f_2h).
double extrapolated_origin(double f_h, double f_2h) { return f_h * (f_h / f_2h); }

}  // namespace

double exp_moment(int k, double L) {
  if (k < 0 || k > 2) throw InvalidParameter("exp_moment supports k = 0, 1, 2");
  if (std::abs(L) < 1.0) {
    // sum_n L^n / (n! (n + k + 1))
    double term = 1.0;  // L^n / n!
    double sum = 1.0 / (k + 1);
    for (int n = 1; n < 40; ++n) {
      term *= L / n;
      const double add = term / (n + k + 1);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  const double e = std::exp(L);
  double m = std::expm1(L) / L;
  for (int i = 1; i <= k; ++i) m = (e - i * m) / L;
  return m;
}

double cell_plain(const CellSample& s) {
  check_cell(s);
  const double L = log_ratio(s.f_left, s.f_right);
  return s.h * s.f_left * exp_moment(0, L);
}

HatPair cell_hat(const CellSample& s) {
  check_cell(s);
  const double L = log_ratio(s.f_left, s.f_right);
  return {s.h * s.f_right * exp_moment(1, -L), s.h * s.f_left * exp_moment(1, L)};
}

double cell_linear_weight(const CellSample& s, double w_left, double w_right) {
  const HatPair hp = cell_hat(s);
  return w_left * hp.left + w_right * hp.right;
}

double first_cells_plain(double f_h, double f_2h, double h) {
  if (!(h > 0.0)) throw InvalidParameter("cell step must be positive");
  const double L = log_ratio(f_h, f_2h);
  const double f0 = extrapolated_origin(f_h, f_2h);
  return h * exp_moment(0, L) * (f0 + f_h);
}

double cell_age_weighted(const CellSample& s) {
  check_cell(s);
  const double L = log_ratio(s.f_left, s.f_right);
  return s.h * s.h * s.f_left * (s.j * exp_moment(0, L) + exp_moment(1, L));
}

double first_cells_age_weighted(double f_h, double f_2h, double h) {
  if (!(h > 0.0)) throw InvalidParameter("cell step must be positive");
  const double L = log_ratio(f_h, f_2h);
  const double f0 = extrapolated_origin(f_h, f_2h);
  const double m0 = exp_moment(0, L);
  const double m1 = exp_moment(1, L);
  return h * h * (f0 * m1 + f_h * (m0 + m1));
}

double cell_reflected(const CellSample& s, double reflect) {
  check_cell(s);
  const double L = log_ratio(s.f_left, s.f_right);
  const double plain = s.h * s.f_left * exp_moment(0, L);
  const double left_hat = s.h * s.f_right * exp_moment(1, -L);
  return (reflect - (s.j + 1) * s.h) * plain + s.h * left_hat;
}

namespace {

void require_interior(const AgeProfile& profile) {
  if (profile.cells() < 2) throw InvalidParameter("profile needs at least two cells");
  for (int j = 1; j <= profile.cells(); ++j) {
    const double v = profile.values[static_cast<std::size_t>(j)];
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "profile value at node " << j << " is not positive (" << v << ")";
      throw NonPositiveProfile(msg.str(), -1, j);
    }
  }
}

}  // namespace

double integrate_profile(const AgeProfile& profile) {
  require_interior(profile);
  const auto& f = profile.values;
  const double h = profile.step;
  double acc = first_cells_plain(f[1], f[2], h);
  for (int j = 2; j < profile.cells(); ++j) {
    acc += cell_plain({f[static_cast<std::size_t>(j)], f[static_cast<std::size_t>(j + 1)], j, h});
  }
  return acc;
}

double integrate_profile(const AgeProfile& profile, std::span<const double> weight_nodes) {
  require_interior(profile);
  if (weight_nodes.size() != profile.values.size()) {
    throw InvalidParameter("weight table size does not match profile");
  }
  const auto& f = profile.values;
  const double h = profile.step;
  // Cell 0 uses the exponential of cell 1 continued down to a = 0.
  double acc = cell_linear_weight({extrapolated_origin(f[1], f[2]), f[1], 0, h}, weight_nodes[0], weight_nodes[1]);
  for (int j = 1; j < profile.cells(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    acc += cell_linear_weight({f[ju], f[ju + 1], j, h}, weight_nodes[ju], weight_nodes[ju + 1]);
  }
  return acc;
}

double integrate_nodes(std::span<const double> values, double h, std::span<const double> weight_nodes) {
  if (values.size() < 2 || weight_nodes.size() != values.size()) {
    throw InvalidParameter("node and weight tables must match and hold >= 2 nodes");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < values.size(); ++j) {
    acc += cell_linear_weight({values[j], values[j + 1], static_cast<int>(j), h}, weight_nodes[j], weight_nodes[j + 1]);
  }
  return acc;
}

}  // namespace chemostat::quadrature
