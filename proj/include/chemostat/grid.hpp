#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chemostat {

/// Uniform age grid with nodes a_j = j*h, j = 0..cells, cells*h == horizon.
struct AgeGrid {
  double horizon = 0.0;
  int cells = 0;

  /// Builds a grid from a requested step; throws InvalidParameter unless
  /// horizon/step is an integer.
  static AgeGrid from_step(double horizon, double step);
  static AgeGrid from_cells(double horizon, int cells);

  double step() const { return horizon / cells; }
  int nodes() const { return cells + 1; }
  double age(int j) const { return horizon * j / cells; }

  /// True if `a` coincides with a grid node up to rounding.
  bool is_node(double a) const;
  int node_index(double a) const;
  AgeGrid refined(int factor) const { return from_cells(horizon, cells * factor); }
};

/// Nodal samples of an age density on a uniform grid.
struct AgeProfile {
  double step = 0.0;
  std::vector<double> values;

  int cells() const { return static_cast<int>(values.size()) - 1; }
  double horizon() const { return step * cells(); }

  AgeProfile scaled(double factor) const;
};

/// Continuous piecewise-linear function given by knots and values.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

  static PiecewiseLinear constant(double value, double horizon);
  /// Symmetric tent g*min(a, horizon - a).
  static PiecewiseLinear triangular(double scale, double horizon);

  double operator()(double a) const;
  /// Exact integral over [0, a].
  double integral_to(double a) const;
  double integral() const { return integral_to(knots_.back()); }
  double min_value() const;
  double max_value() const;
  bool is_constant() const;

  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }

  /// Samples at every grid node; throws InvalidParameter when an interior
  /// knot is not a grid node (cell rules assume linearity on each cell).
  std::vector<double> sample_aligned(const AgeGrid& grid) const;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Cumulative integral J(a_j) of `f` at every grid node.
std::vector<double> cumulative_at_nodes(const PiecewiseLinear& f, const AgeGrid& grid);

}  // namespace chemostat
