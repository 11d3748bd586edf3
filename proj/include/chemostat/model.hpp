#pragma once

#include "chemostat/grid.hpp"

namespace chemostat {

/// Age-structured chemostat: f_t + f_a = -(mu(a) + D(t)) f,  f(t,0) = int k f.
struct ModelParams {
  double horizon = 2.0;             ///< maximal age A
  PiecewiseLinear mortality;        ///< mu(a) >= 0
  PiecewiseLinear birth_modulus;    ///< k(a) >= 0, int k > 0
  PiecewiseLinear output_weight;    ///< p(a) >= 0, int p > 0
  double d_min = 0.5;               ///< dilution bounds
  double d_max = 1.5;
  double period = 0.4;              ///< sampling period T
  double scale = 1.0;               ///< equilibrium scale M

  /// Throws InvalidParameter naming the offending field.
  void validate() const;
};

/// Tent scale g such that g*min(a, A-a) satisfies the Lotka-Sharpe equation
/// at `d_star` under constant mortality.
double triangular_birth_scale(double mortality, double d_star, double horizon = 2.0);

/// The three-simulation setup: A = 2, mu = 0.1, tent k scaled for D* = 1,
/// p = 1, D in [0.5, 1.5], T = 0.4, M = 1.
ModelParams reference_params();

/// 1 - int_0^A k(a) exp(-D a - int_0^a mu) da, strictly increasing in D.
double lotka_sharpe_residual(double dilution, const ModelParams& params);

/// int_0^A w(a) exp(-rate a - int_0^a mu) da, exact when mu is constant.
double survival_weighted_integral(const PiecewiseLinear& weight, const PiecewiseLinear& mortality, double rate);

struct Equilibrium {
  double d_star = 0.0;
  AgeProfile f_star;   ///< M exp(-d_star a - int mu) on the grid
  double beta = 0.0;   ///< int p exp(-d_star a - int mu)
  double y_star = 0.0; ///< M * beta
};

/// Bisection on [D_min, D_max]; throws NoRootInBracket without a sign change.
Equilibrium solve_d_star(const ModelParams& params, const AgeGrid& grid);

/// Equilibrium profile for a given dilution rate (no root finding).
Equilibrium equilibrium_at(double d_star, const ModelParams& params, const AgeGrid& grid);

/// f0(a) = b0 - b1 a + c exp(-theta a) with b1 fixed by f0(0) = int k f0.
struct InitialFamily {
  double b0 = 0.0;
  double c = 0.0;
  double theta = 0.0;
  double b1 = 0.0;

  double operator()(double a) const;
  AgeProfile sample(const AgeGrid& grid) const;
};

/// Solves for b1 and validates positivity and compatibility (10^-9 relative).
/// Throws NonPositiveProfile or IncompatibleBoundary.
InitialFamily make_initial_family(double b0, double c, double theta, const ModelParams& params);

/// Closed form of b1 for the tent modulus on [0, 2] with scale g.
double tent_initial_slope(double b0, double c, double theta, double g);

AgeProfile make_initial_profile(double b0, double c, double theta, const ModelParams& params, const AgeGrid& grid);

/// Validates a tabulated initial profile: positive everywhere and
/// f0(0) = int k f0 (integral from nodes 1..N) within `rel_tol`.
AgeProfile profile_from_table(std::vector<double> values, const ModelParams& params, const AgeGrid& grid,
                              double rel_tol = 1e-9);

/// Overwrites node 0 with the renewal integral of nodes 1..N.
AgeProfile make_compatible(AgeProfile profile, const ModelParams& params, const AgeGrid& grid);

}  // namespace chemostat
