#pragma once

// Integral delay equation along characteristics.
//
// With z(t,a) = exp(-int_0^a mu) v(t-a), the renewal condition becomes the
// scalar equation
//     v(t) = int_0^A G(a) v(t-a) da,   G(a) = k(a) exp(-int_0^a mu),
// with history v(-a) = exp(int_0^a mu) z0(a). Solving it with a rate offset r
// means tracking w(t) = exp(-r t) v(t), whose kernel is G(a) exp(-r a); with
// r = D* the kernel has unit mass and constants are fixed points.

#include <functional>
#include <vector>

#include "chemostat/control.hpp"
#include "chemostat/grid.hpp"
#include "chemostat/metrics.hpp"
#include "chemostat/model.hpp"
#include "chemostat/pde_sim.hpp"

namespace chemostat::ide {

/// G(a_j) = modulus_j * envelope_j; modulus is linear on each cell and the
/// envelope is exponential on each cell.
struct Kernel {
  AgeGrid grid;
  std::vector<double> modulus;
  std::vector<double> envelope;

  double at(int j) const { return modulus[static_cast<std::size_t>(j)] * envelope[static_cast<std::size_t>(j)]; }
  /// Kernel of exp(p t) w(t): envelope multiplied by exp(p a).
  Kernel rescaled(double p) const;
};

/// k(a) exp(-rate_offset a - int_0^a mu) on the grid.
Kernel kernel_from_model(const ModelParams& params, const AgeGrid& grid, double rate_offset = 0.0);
/// Piecewise-linear kernel through the given node values.
Kernel kernel_from_table(const AgeGrid& grid, std::vector<double> values);

/// Product-integration weights: W_j = int G(a) hat_j(a) da, so that
/// int G(a) w(t_n - a) da ~= sum_j W_j w_{n-j} with w linear between nodes.
/// Exact for the stated kernel form; sum_j W_j = int G.
std::vector<double> product_weights(const Kernel& kernel);

/// Constants of the sup/inf envelope for x(t) = int G x(t-a).
struct SplitConstants {
  double mass = 0.0;       ///< L = int G
  double split = 0.0;      ///< Delta
  double split_mass = 0.0; ///< c = int_0^Delta G
  double growth = 0.0;     ///< b = (L - c)/(1 - c)
  double window = 0.0;     ///< min{Delta, A - Delta}
};

/// `split` must be a grid node in (0, A); defaults to A/2. Throws
/// SplitMassTooLarge when int_0^Delta G >= 1.
SplitConstants split_constants(const Kernel& kernel, double split = -1.0);

/// Largest grid node in (0, A/2] whose split mass is below 1; throws
/// SplitMassTooLarge when even the first cell carries mass >= 1.
double admissible_split(const Kernel& kernel);

struct IdeProblem {
  Kernel kernel;
  std::vector<double> weights;
  std::vector<double> history;  ///< history[m-1] = w(-m h), m = 1..N
  double rate_offset = 0.0;

  double step() const { return kernel.grid.step(); }
  int cells() const { return kernel.grid.cells; }
};

IdeProblem make_problem(Kernel kernel, std::vector<double> history, double rate_offset = 0.0);

/// w(-a) = exp(rate_offset a + int_0^a mu) f0(a) at a = h..A.
std::vector<double> history_from_profile(const std::function<double(double)>& f0, const ModelParams& params,
                                         const AgeGrid& grid, double rate_offset);

/// IDE for the uncontrolled model with initial profile f0, tracked with the
/// given rate offset (0: v itself, D*: exp(-D* t) v, unit-mass kernel).
IdeProblem problem_from_model(const ModelParams& params, const AgeGrid& grid,
                              const std::function<double(double)>& f0, double rate_offset);

struct IdeSolution {
  double step = 0.0;
  double rate_offset = 0.0;
  std::vector<double> history;  ///< as in IdeProblem
  std::vector<double> values;   ///< w(n h), n = 0..n_end

  /// w(n h) for n in [-N, n_end].
  double at(long n) const;
  /// v(n h) = exp(rate_offset n h) w(n h).
  double v_at(long n) const;
  double time(long n) const { return static_cast<double>(n) * step; }
  long last() const { return static_cast<long>(values.size()) - 1; }
};

/// Marches w_n (1 - W_0) = sum_{j>=1} W_j w_{n-j}. Throws IllPosedStep when W_0 >= 1.
IdeSolution solve_ide(const IdeProblem& problem, double t_end);

/// Rebuilds f(t_n, a_j) = exp(-int_0^{t_n} D) exp(-int_0^{a_j} mu) v(t_n - a_j).
/// `dilution_path[i]` is the rate held on [i h, (i+1) h).
AgeProfile reconstruct_pde(const IdeSolution& solution, const ModelParams& params, const AgeGrid& grid,
                           const std::vector<double>& dilution_path, long n);

struct Envelope {
  double lower = 0.0;
  double upper = 0.0;
};

/// min{a1, a1 b^{1+t/h}} <= window inf/sup <= max{a2, a2 b^{1+t/h}}.
/// Requires mass >= 1 (rescale first otherwise).
Envelope split_envelope(const SplitConstants& constants, double a1, double a2, double t);

/// Smallest p >= 0 (to ~1e-9) with int G e^{pa} >= 1.
double envelope_rescaling(const Kernel& kernel);

/// Same IDE written for x(t) = exp(p t) w(t).
IdeProblem rescaled_problem(const IdeProblem& problem, double p);

struct EnvelopeReport {
  double worst_violation = 0.0;  ///< max over grid times of excess beyond the bracket (<= 0 inside)
  long worst_step = 0;
  bool holds = false;
};

/// Checks the window inf/sup of the solution against the bracket at every
/// grid time t_n, n = 0..last, with additive slack scaled by max(1, |bound|).
EnvelopeReport verify_split_envelope(const IdeProblem& problem, const IdeSolution& solution,
                             const SplitConstants& constants, double slack = 1e-8);

/// Ratio of the two age integrals defining the ergodic projection P(f0),
/// evaluated by product integration on the grid refined `refine` times.
double ergodic_projection(const std::function<double(double)>& f0, const ModelParams& params, double d_star,
                          const AgeGrid& grid, int refine = 4);
double ergodic_projection(const AgeProfile& f0, const ModelParams& params, double d_star, const AgeGrid& grid,
                          int refine = 4);

/// Limit of the discrete unit-mass scheme: conserved sum_m w_{-m} T_m divided
/// by the mean delay, T_m = sum_{j>=m} W'_j, W'_j = W_j/(1 - W_0).
double discrete_projection(const IdeProblem& normalized);

struct ErgodicDiagnostics {
  double projection = 0.0;
  std::vector<double> times;  ///< t_n for n = -N..last
  std::vector<double> phi;    ///< exp(-D* t) v(t) - P at those times
  double eps_fit = 0.0;
  double k_fit = 0.0;         ///< max over the fit window of |phi| e^{eps t}
  metrics::DecayFit fit;
  bool degenerate = false;

  /// Index of time 0 within `times`/`phi`.
  std::size_t origin = 0;
};

/// Needs a solution reaching t >= 3A. Fit window starts at `fit_start`
/// (A when negative).
ErgodicDiagnostics phi_and_decay(const IdeSolution& solution, double d_star, double projection, double horizon,
                                 double fit_start = -1.0);

/// max_a G(a) exp(rate_offset a) over the kernel's cell representation,
/// i.e. max_a k(a) exp(-int_0^a mu) for a model kernel built with that offset.
double renewal_bound_constant(const Kernel& kernel, double rate_offset);

struct RenewalBoundReport {
  double worst_excess = 0.0;  ///< max_n |phi_n| - C sum_j E_j |phi_{n-j}|
  bool holds = false;
};

/// |phi(t)| <= C int_0^A e^{-D* a} |phi(t-a)| da at every computed grid time,
/// with the integral discretised on the same product-integration nodes.
RenewalBoundReport verify_renewal_bound(const ErgodicDiagnostics& diag, const AgeGrid& grid, double d_star,
                                        double bound_constant, double slack_rel = 1e-9);

struct ContractionRow {
  long index = 0;
  double x = 0.0;       ///< ln(m(iT)/reference)
  double x_next = 0.0;
  double u = 0.0;       ///< ln of the ergodic-component ratio between iT and (i+1)T
  double rhs = 0.0;     ///< |x_i| - min{|x_i|, 2 delta} + |u_i|
  bool holds = false;
};

/// Per-period contraction |x_{i+1}| <= |x_i| - min{|x_i|, 2 delta} + |u_i|.
///
/// `closed` and `open_loop` must record every step from the same f0;
/// `open_loop` is run at the true D*, whose measured quantity equals
/// reference * (P + int g(a) phi(t - a) da), so u_i is the log ratio of its
/// consecutive samples. `reference` is the effective set point (after any
/// bias is rewritten as a set-point shift).
std::vector<ContractionRow> contraction_monitor(const TimeSeries& closed, const TimeSeries& open_loop, ControlVariant measured,
                                      double reference, long period_steps, double delta, double slack = 1e-6);

}  // namespace chemostat::ide
