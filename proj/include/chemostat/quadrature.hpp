#pragma once

// Exponential-interpolation quadrature on uniform age grids.
//
// On each cell [jh, (j+1)h] the density is replaced by the exponential
// C*exp(sigma*a) through its two endpoint samples, and the weighted integral
// of that interpolant is evaluated in closed form. Every rule is therefore
// exact for profiles of the form C*exp(sigma*a), which includes every
// equilibrium profile under constant mortality.
//
// The closed forms are evaluated through the moments
//     m_k(L) = int_0^1 x^k exp(L x) dx,   L = ln(f_right / f_left),
// which stay accurate as f_right -> f_left (the formulas written with
// divisions by L and L^2 cancel catastrophically there).

#include <span>

#include "chemostat/grid.hpp"

namespace chemostat::quadrature {

/// m_k(L) for k = 0, 1, 2.
double exp_moment(int k, double L);

struct CellSample {
  double f_left = 0.0;
  double f_right = 0.0;
  int j = 0;  ///< cell index: the cell is [j*h, (j+1)*h]
  double h = 0.0;
};

/// int over the cell of the interpolant.
double cell_plain(const CellSample& s);

/// int_0^{2h} of the exponential through (h, f_h) and (2h, f_2h), i.e. the
/// first two cells without reading the boundary node.
double first_cells_plain(double f_h, double f_2h, double h);

/// int over the cell of a * interpolant.
double cell_age_weighted(const CellSample& s);

/// int_0^{2h} a * (exponential through (h, f_h), (2h, f_2h)).
double first_cells_age_weighted(double f_h, double f_2h, double h);

/// int over the cell of (reflect - a) * interpolant; `reflect` is the age at
/// which the falling weight vanishes (2 for the reference tent on [0, 2]).
double cell_reflected(const CellSample& s, double reflect);

/// Integrals of the interpolant against the two hat functions of the cell:
/// left = int (1 - x) f, right = int x f, x = (a - jh)/h.
struct HatPair {
  double left = 0.0;
  double right = 0.0;
};
HatPair cell_hat(const CellSample& s);

/// Integral of f * (linear weight through (w_left, w_right)) over one cell.
double cell_linear_weight(const CellSample& s, double w_left, double w_right);

/// int_0^A profile(a) da. Nodes 1..N must be positive; node 0 is never read:
/// [0, 2h] uses the exponential extrapolated from nodes 1 and 2.
double integrate_profile(const AgeProfile& profile);

/// int_0^A w(a) profile(a) da with w given at the grid nodes (linear per cell).
double integrate_profile(const AgeProfile& profile, std::span<const double> weight_nodes);

/// Same as integrate_profile but reads every node including a = 0 (for
/// profiles whose boundary value is known).
double integrate_nodes(std::span<const double> values, double h, std::span<const double> weight_nodes);

}  // namespace chemostat::quadrature
