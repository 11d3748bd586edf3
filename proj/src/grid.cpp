#include "chemostat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemostat/errors.hpp"

namespace chemostat {

namespace {
constexpr double kNodeTol = 1e-9;
}

AgeGrid AgeGrid::from_step(double horizon, double step) {
  if (!(horizon > 0.0) || !(step > 0.0)) {
    throw InvalidParameter("grid horizon and step must be positive");
  }
  const double ratio = horizon / step;
  const double cells = std::round(ratio);
  if (cells < 1.0 || std::abs(ratio - cells) > kNodeTol * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "horizon/step not integer (A=" << horizon << ", h=" << step << ")";
    throw InvalidParameter(msg.str());
  }
  return from_cells(horizon, static_cast<int>(cells));
}

AgeGrid AgeGrid::from_cells(double horizon, int cells) {
  if (!(horizon > 0.0) || cells < 1) {
    throw InvalidParameter("grid needs a positive horizon and at least one cell");
  }
  return AgeGrid{horizon, cells};
}

bool AgeGrid::is_node(double a) const {
  const double x = a / step();
  return std::abs(x - std::round(x)) <= kNodeTol * std::max(1.0, std::abs(x)) && a >= -kNodeTol &&
         a <= horizon * (1.0 + kNodeTol);
}

int AgeGrid::node_index(double a) const {
  if (!is_node(a)) {
    std::ostringstream msg;
    msg << "age " << a << " is not a grid node (h=" << step() << ")";
    throw InvalidParameter(msg.str());
  }
  return static_cast<int>(std::lround(a / step()));
}

AgeProfile AgeProfile::scaled(double factor) const {
  AgeProfile out = *this;
  for (double& v : out.values) v *= factor;
  return out;
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() < 2 || knots_.size() != values_.size()) {
    throw InvalidParameter("piecewise-linear table needs >= 2 knots with matching values");
  }
  if (knots_.front() != 0.0) {
    throw InvalidParameter("piecewise-linear table must start at age 0");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] > knots_[i - 1])) {
      throw InvalidParameter("piecewise-linear knots must be strictly increasing");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidParameter("piecewise-linear values must be finite");
  }
}

PiecewiseLinear PiecewiseLinear::constant(double value, double horizon) {
  return PiecewiseLinear({0.0, horizon}, {value, value});
}

PiecewiseLinear PiecewiseLinear::triangular(double scale, double horizon) {
  return PiecewiseLinear({0.0, 0.5 * horizon, horizon}, {0.0, 0.5 * horizon * scale, 0.0});
}

double PiecewiseLinear::operator()(double a) const {
  if (a <= knots_.front()) return values_.front();
  if (a >= knots_.back()) return values_.back();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), a);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin());
  const double x0 = knots_[i - 1];
  const double x1 = knots_[i];
  const double s = (a - x0) / (x1 - x0);
  return values_[i - 1] + s * (values_[i] - values_[i - 1]);
}

double PiecewiseLinear::integral_to(double a) const {
  double acc = 0.0;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    const double x0 = knots_[i - 1];
    if (a <= x0) break;
    const double x1 = std::min(knots_[i], a);
    acc += 0.5 * (x1 - x0) * (values_[i - 1] + (*this)(x1));
  }
  return acc;
}

double PiecewiseLinear::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double PiecewiseLinear::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

bool PiecewiseLinear::is_constant() const {
  return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
}

std::vector<double> PiecewiseLinear::sample_aligned(const AgeGrid& grid) const {
  if (std::abs(knots_.back() - grid.horizon) > kNodeTol * grid.horizon) {
    throw InvalidParameter("piecewise-linear table does not span the age horizon");
  }
  for (std::size_t i = 1; i + 1 < knots_.size(); ++i) {
    if (!grid.is_node(knots_[i])) {
      std::ostringstream msg;
      msg << "breakpoint " << knots_[i] << " is not aligned with grid step " << grid.step();
      throw InvalidParameter(msg.str());
    }
  }
  std::vector<double> out(static_cast<std::size_t>(grid.nodes()));
  for (int j = 0; j < grid.nodes(); ++j) out[static_cast<std::size_t>(j)] = (*this)(grid.age(j));
  return out;
}

std::vector<double> cumulative_at_nodes(const PiecewiseLinear& f, const AgeGrid& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.nodes()), 0.0);
  for (int j = 1; j < grid.nodes(); ++j) {
    const double a0 = grid.age(j - 1);
    const double a1 = grid.age(j);
    double cell = 0.0;
    // Exact: f is linear between consecutive knots, and knots may fall inside a cell.
    double lo = a0;
    for (double k : f.knots()) {
      if (k > lo && k < a1) {
        cell += 0.5 * (k - lo) * (f(lo) + f(k));
        lo = k;
      }
    }
    cell += 0.5 * (a1 - lo) * (f(lo) + f(a1));
    out[static_cast<std::size_t>(j)] = out[static_cast<std::size_t>(j - 1)] + cell;
  }
  return out;
}

}  // namespace chemostat
