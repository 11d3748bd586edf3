#include "chemostat/ide.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chemostat/errors.hpp"
#include "chemostat/quadrature.hpp"

namespace chemostat::ide {

namespace {

using quadrature::exp_moment;

// Integrals of x^2, x(1-x), (1-x)^2 against the cell envelope e_l (e_r/e_l)^x,
// x = (a - a_j)/h, including the factor h.
struct CellMoments {
  double right_right = 0.0;
  double left_right = 0.0;
  double left_left = 0.0;
};

CellMoments cell_moments(double e_left, double e_right, double h) {
  if (e_left == 0.0 && e_right == 0.0) return {};
  const double L = std::log(e_right / e_left);
  const double m1 = exp_moment(1, L);
  const double m2 = exp_moment(2, L);
  return {h * e_left * m2, h * e_left * (m1 - m2), h * e_right * exp_moment(2, -L)};
}

// int over the cell of (l_a (1-x) + r_a x)(l_b (1-x) + r_b x) envelope.
double bilinear(const CellMoments& m, double l_a, double r_a, double l_b, double r_b) {
  return l_a * l_b * m.left_left + (l_a * r_b + r_a * l_b) * m.left_right + r_a * r_b * m.right_right;
}

void check_kernel(const Kernel& kernel) {
  const auto n = static_cast<std::size_t>(kernel.grid.nodes());
  if (kernel.grid.cells < 2) throw InvalidParameter("kernel grid needs at least 2 cells");
  if (kernel.modulus.size() != n || kernel.envelope.size() != n) {
    throw InvalidParameter("kernel tables do not match the grid");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(kernel.modulus[j] >= 0.0) || !std::isfinite(kernel.modulus[j])) {
      throw InvalidParameter("kernel modulus must be finite and >= 0");
    }
    if (!(kernel.envelope[j] > 0.0) || !std::isfinite(kernel.envelope[j])) {
      throw InvalidParameter("kernel envelope must be finite and > 0");
    }
  }
}

double cell_mass(const Kernel& kernel, int j) {
  const auto a = static_cast<std::size_t>(j);
  const CellMoments m = cell_moments(kernel.envelope[a], kernel.envelope[a + 1], kernel.grid.step());
  return bilinear(m, kernel.modulus[a], kernel.modulus[a + 1], 1.0, 1.0);
}

double kernel_mass(const Kernel& kernel) {
  double s = 0.0;
  for (int j = 0; j < kernel.grid.cells; ++j) s += cell_mass(kernel, j);
  return s;
}

}  // namespace

Kernel Kernel::rescaled(double p) const {
  Kernel out = *this;
  for (int j = 0; j < grid.nodes(); ++j) out.envelope[static_cast<std::size_t>(j)] *= std::exp(p * grid.age(j));
  return out;
}

Kernel kernel_from_model(const ModelParams& params, const AgeGrid& grid, double rate_offset) {
  params.validate();
  Kernel kernel;
  kernel.grid = grid;
  kernel.modulus = params.birth_modulus.sample_aligned(grid);
  const auto cum = cumulative_at_nodes(params.mortality, grid);
  kernel.envelope.resize(cum.size());
  for (int j = 0; j < grid.nodes(); ++j) {
    const auto a = static_cast<std::size_t>(j);
    kernel.envelope[a] = std::exp(-rate_offset * grid.age(j) - cum[a]);
  }
  check_kernel(kernel);
  return kernel;
}

Kernel kernel_from_table(const AgeGrid& grid, std::vector<double> values) {
  Kernel kernel;
  kernel.grid = grid;
  kernel.modulus = std::move(values);
  kernel.envelope.assign(static_cast<std::size_t>(grid.nodes()), 1.0);
  check_kernel(kernel);
  return kernel;
}

std::vector<double> product_weights(const Kernel& kernel) {
  check_kernel(kernel);
  std::vector<double> w(kernel.modulus.size(), 0.0);
  const double h = kernel.grid.step();
  for (std::size_t j = 0; j + 1 < w.size(); ++j) {
    const CellMoments m = cell_moments(kernel.envelope[j], kernel.envelope[j + 1], h);
    const double ml = kernel.modulus[j];
    const double mr = kernel.modulus[j + 1];
    w[j] += ml * m.left_left + mr * m.left_right;
    w[j + 1] += ml * m.left_right + mr * m.right_right;
  }
  return w;
}

SplitConstants split_constants(const Kernel& kernel, double split) {
  check_kernel(kernel);
  const AgeGrid& grid = kernel.grid;
  if (split < 0.0) split = 0.5 * grid.horizon;
  if (!(split > 0.0 && split < grid.horizon) || !grid.is_node(split)) {
    throw InvalidParameter("split point must be a grid node strictly inside (0, A)");
  }
  const int s = grid.node_index(split);
  SplitConstants out;
  out.split = grid.age(s);
  for (int j = 0; j < grid.cells; ++j) {
    const double m = cell_mass(kernel, j);
    out.mass += m;
    if (j < s) out.split_mass += m;
  }
  if (!(out.split_mass < 1.0)) {
    std::ostringstream msg;
    msg << "int_0^Delta G = " << out.split_mass << " >= 1 (Delta = " << out.split << ")";
    throw SplitMassTooLarge(msg.str());
  }
  out.growth = (out.mass - out.split_mass) / (1.0 - out.split_mass);
  out.window = std::min(out.split, grid.horizon - out.split);
  return out;
}

double admissible_split(const Kernel& kernel) {
  check_kernel(kernel);
  double mass = 0.0;
  int best = 0;
  for (int j = 0; 2 * (j + 1) <= kernel.grid.cells; ++j) {
    mass += cell_mass(kernel, j);
    if (!(mass < 1.0)) break;
    best = j + 1;
  }
  if (best == 0) throw SplitMassTooLarge("kernel mass on the first cell is >= 1");
  return kernel.grid.age(best);
}

IdeProblem make_problem(Kernel kernel, std::vector<double> history, double rate_offset) {
  check_kernel(kernel);
  if (static_cast<int>(history.size()) != kernel.grid.cells) {
    throw InvalidParameter("history must hold one value per grid age h..A");
  }
  for (double v : history) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("history must be finite and >= 0");
  }
  IdeProblem p;
  p.weights = product_weights(kernel);
  p.kernel = std::move(kernel);
  p.history = std::move(history);
  p.rate_offset = rate_offset;
  return p;
}

std::vector<double> history_from_profile(const std::function<double(double)>& f0, const ModelParams& params,
                                         const AgeGrid& grid, double rate_offset) {
  const auto cum = cumulative_at_nodes(params.mortality, grid);
  std::vector<double> hist(static_cast<std::size_t>(grid.cells));
  for (int m = 1; m <= grid.cells; ++m) {
    const double a = grid.age(m);
    hist[static_cast<std::size_t>(m - 1)] = std::exp(rate_offset * a + cum[static_cast<std::size_t>(m)]) * f0(a);
  }
  return hist;
}

IdeProblem problem_from_model(const ModelParams& params, const AgeGrid& grid,
                              const std::function<double(double)>& f0, double rate_offset) {
  return make_problem(kernel_from_model(params, grid, rate_offset), history_from_profile(f0, params, grid, rate_offset),
                      rate_offset);
}

double IdeSolution::at(long n) const {
  if (n >= 0) return values.at(static_cast<std::size_t>(n));
  return history.at(static_cast<std::size_t>(-n - 1));
}

double IdeSolution::v_at(long n) const { return std::exp(rate_offset * time(n)) * at(n); }

IdeSolution solve_ide(const IdeProblem& problem, double t_end) {
  const double h = problem.step();
  const int N = problem.cells();
  const double w0 = problem.weights.at(0);
  if (!(w0 < 1.0)) {
    std::ostringstream msg;
    msg << "implicit weight at a = 0 is " << w0 << " >= 1; refine the step";
    throw IllPosedStep(msg.str());
  }
  const long n_end = steps_for(t_end, h);
  IdeSolution sol;
  sol.step = h;
  sol.rate_offset = problem.rate_offset;
  sol.history = problem.history;
  sol.values.resize(static_cast<std::size_t>(n_end + 1));
  for (long n = 0; n <= n_end; ++n) {
    double rest = 0.0;
    for (int j = 1; j <= N; ++j) rest += problem.weights[static_cast<std::size_t>(j)] * sol.at(n - j);
    sol.values[static_cast<std::size_t>(n)] = rest / (1.0 - w0);
  }
  return sol;
}

AgeProfile reconstruct_pde(const IdeSolution& solution, const ModelParams& params, const AgeGrid& grid,
                           const std::vector<double>& dilution_path, long n) {
  if (std::abs(solution.step - grid.step()) > 1e-12 * grid.step()) {
    throw InvalidParameter("solution and grid steps differ");
  }
  if (n < 0 || n > solution.last()) throw InvalidParameter("reconstruction time outside the solution");
  if (static_cast<long>(dilution_path.size()) < n) throw InvalidParameter("dilution path shorter than t/h");
  double dilution = 0.0;
  for (long i = 0; i < n; ++i) dilution += dilution_path[static_cast<std::size_t>(i)] * grid.step();
  const auto cum = cumulative_at_nodes(params.mortality, grid);
  AgeProfile out{grid.step(), std::vector<double>(static_cast<std::size_t>(grid.nodes()))};
  for (int j = 0; j < grid.nodes(); ++j) {
    const auto a = static_cast<std::size_t>(j);
    out.values[a] = std::exp(-dilution - cum[a]) * solution.v_at(n - j);
  }
  return out;
}

Envelope split_envelope(const SplitConstants& constants, double a1, double a2, double t) {
  if (!(constants.split_mass < 1.0)) throw SplitMassTooLarge("int_0^Delta G >= 1");
  if (constants.mass < 1.0 - 1e-12) {
    throw InvalidParameter("envelope needs int G >= 1; rescale the problem first");
  }
  if (!(a1 <= a2)) throw InvalidParameter("envelope needs a1 <= a2");
  const double growth = std::pow(constants.growth, 1.0 + t / constants.window);
  return {std::min(a1, a1 * growth), std::max(a2, a2 * growth)};
}

double envelope_rescaling(const Kernel& kernel) {
  if (kernel_mass(kernel) >= 1.0) return 0.0;
  double lo = 0.0;
  double hi = 0.5;
  int doublings = 0;
  while (kernel_mass(kernel.rescaled(hi)) < 1.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) throw InvalidParameter("kernel mass cannot be raised to 1 by rescaling");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kernel_mass(kernel.rescaled(mid)) < 1.0 ? lo : hi) = mid;
  }
  return hi;
}

IdeProblem rescaled_problem(const IdeProblem& problem, double p) {
  std::vector<double> hist = problem.history;
  for (std::size_t m = 0; m < hist.size(); ++m) {
    hist[m] *= std::exp(-p * problem.step() * static_cast<double>(m + 1));
  }
  return make_problem(problem.kernel.rescaled(p), std::move(hist), problem.rate_offset - p);
}

EnvelopeReport verify_split_envelope(const IdeProblem& problem, const IdeSolution& solution,
                             const SplitConstants& constants, double slack) {
  const auto [lo_it, hi_it] = std::minmax_element(problem.history.begin(), problem.history.end());
  const double a1 = *lo_it;
  const double a2 = *hi_it;
  EnvelopeReport rep;
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  bool ok = true;
  for (long n = 0; n <= solution.last(); ++n) {
    const Envelope env = split_envelope(constants, a1, a2, solution.time(n));
    const double x = solution.at(n);
    const double excess = std::max(env.lower - x, x - env.upper);
    if (excess > rep.worst_violation) {
      rep.worst_violation = excess;
      rep.worst_step = n;
    }
    if (excess > slack * std::max({1.0, std::abs(env.lower), std::abs(env.upper)})) ok = false;
  }
  rep.holds = ok;
  return rep;
}

double ergodic_projection(const std::function<double(double)>& f0, const ModelParams& params, double d_star,
                          const AgeGrid& grid, int refine) {
  if (refine < 1) throw InvalidParameter("refinement factor must be >= 1");
  const AgeGrid fine = grid.refined(refine);
  const Kernel kernel = kernel_from_model(params, fine, d_star);  // k e^{-Lambda}
  const double h = fine.step();
  const int n = fine.nodes();

  // F(s) = int_0^s f0 e^{Lambda}, composite trapezoid on the fine nodes
  std::vector<double> growth(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double a = fine.age(j);
    const double v = f0(a);
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "initial profile is not positive at a = " << a;
      throw NonPositiveProfile(msg.str(), -1, j);
    }
    growth[static_cast<std::size_t>(j)] = v / kernel.envelope[static_cast<std::size_t>(j)];
  }
  std::vector<double> cumulative(static_cast<std::size_t>(n), 0.0);
  for (std::size_t j = 1; j < cumulative.size(); ++j) {
    cumulative[j] = cumulative[j - 1] + 0.5 * h * (growth[j - 1] + growth[j]);
  }

  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t j = 0; j + 1 < cumulative.size(); ++j) {
    const CellMoments m = cell_moments(kernel.envelope[j], kernel.envelope[j + 1], h);
    const double kl = kernel.modulus[j];
    const double kr = kernel.modulus[j + 1];
    numerator += bilinear(m, kl, kr, cumulative[j], cumulative[j + 1]);
    denominator += bilinear(m, kl, kr, fine.age(static_cast<int>(j)), fine.age(static_cast<int>(j + 1)));
  }
  return numerator / denominator;
}

double ergodic_projection(const AgeProfile& f0, const ModelParams& params, double d_star, const AgeGrid& grid,
                          int refine) {
  if (static_cast<int>(f0.values.size()) != grid.nodes()) throw InvalidParameter("profile does not match the grid");
  for (std::size_t j = 0; j < f0.values.size(); ++j) {
    if (!(f0.values[j] > 0.0) || !std::isfinite(f0.values[j])) {
      throw NonPositiveProfile("initial profile is not positive", -1, static_cast<long>(j));
    }
  }
  const double h = grid.step();
  // exponential interpolation between nodes, consistent with the quadrature
  auto interp = [&](double a) {
    const double x = a / h;
    const int j = std::clamp(static_cast<int>(std::floor(x + 1e-9)), 0, grid.cells);
    const double r = x - j;
    if (j == grid.cells || std::abs(r) < 1e-9) return f0.values[static_cast<std::size_t>(j)];
    const double fl = f0.values[static_cast<std::size_t>(j)];
    const double fr = f0.values[static_cast<std::size_t>(j + 1)];
    return fl * std::pow(fr / fl, r);
  };
  return ergodic_projection(interp, params, d_star, grid, refine);
}

double discrete_projection(const IdeProblem& normalized) {
  const auto& w = normalized.weights;
  const double w0 = w.at(0);
  double mass = 0.0;
  for (double x : w) mass += x;
  if (std::abs(mass - 1.0) > 1e-9) throw InvalidParameter("discrete projection needs a unit-mass kernel");
  if (!(w0 < 1.0)) throw IllPosedStep("implicit weight at a = 0 is >= 1");
  const int N = normalized.cells();
  double tail = 0.0;
  double invariant = 0.0;
  double mean_delay = 0.0;
  for (int m = N; m >= 1; --m) {
    const double wm = w[static_cast<std::size_t>(m)] / (1.0 - w0);
    tail += wm;
    invariant += normalized.history[static_cast<std::size_t>(m - 1)] * tail;
    mean_delay += m * wm;
  }
  return invariant / mean_delay;
}

ErgodicDiagnostics phi_and_decay(const IdeSolution& solution, double d_star, double projection, double horizon,
                                 double fit_start) {
  if (solution.time(solution.last()) < 3.0 * horizon - 1e-9) {
    throw InvalidParameter("decay diagnostics need a solution reaching t >= 3A");
  }
  if (fit_start < 0.0) fit_start = horizon;
  ErgodicDiagnostics d;
  d.projection = projection;
  const long first = -static_cast<long>(solution.history.size());
  d.origin = static_cast<std::size_t>(-first);
  for (long n = first; n <= solution.last(); ++n) {
    const double t = solution.time(n);
    d.times.push_back(t);
    d.phi.push_back(std::exp((solution.rate_offset - d_star) * t) * solution.at(n) - projection);
  }
  const std::span<const double> times(d.times.data() + d.origin, d.times.size() - d.origin);
  const std::span<const double> phi(d.phi.data() + d.origin, d.phi.size() - d.origin);
  d.fit = metrics::fit_log_linear(times, phi, fit_start);
  d.degenerate = d.fit.degenerate;
  d.eps_fit = d.fit.rate;
  if (d.degenerate) return d;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < fit_start || std::abs(phi[i]) < metrics::kFitFloor) continue;
    d.k_fit = std::max(d.k_fit, std::abs(phi[i]) * std::exp(d.eps_fit * times[i]));
  }
  return d;
}

double renewal_bound_constant(const Kernel& kernel, double rate_offset) {
  check_kernel(kernel);
  const AgeGrid& grid = kernel.grid;
  double best = 0.0;
  for (int j = 0; j < grid.cells; ++j) {
    const auto a = static_cast<std::size_t>(j);
    // (alpha + beta x) exp(gamma x) on x in [0, 1]
    const double el = kernel.envelope[a] * std::exp(rate_offset * grid.age(j));
    const double er = kernel.envelope[a + 1] * std::exp(rate_offset * grid.age(j + 1));
    const double alpha = kernel.modulus[a];
    const double beta = kernel.modulus[a + 1] - alpha;
    const double gamma = std::log(er / el);
    best = std::max({best, alpha * el, kernel.modulus[a + 1] * er});
    if (beta != 0.0 && gamma != 0.0) {
      const double x = -(beta + gamma * alpha) / (gamma * beta);
      if (x > 0.0 && x < 1.0) best = std::max(best, (alpha + beta * x) * el * std::exp(gamma * x));
    }
  }
  return best;
}

RenewalBoundReport verify_renewal_bound(const ErgodicDiagnostics& diag, const AgeGrid& grid, double d_star,
                                        double bound_constant, double slack_rel) {
  Kernel decay;
  decay.grid = grid;
  decay.modulus.assign(static_cast<std::size_t>(grid.nodes()), 1.0);
  decay.envelope.resize(decay.modulus.size());
  for (int j = 0; j < grid.nodes(); ++j) decay.envelope[static_cast<std::size_t>(j)] = std::exp(-d_star * grid.age(j));
  const auto weights = product_weights(decay);
  const auto N = static_cast<std::size_t>(grid.cells);
  if (diag.origin < N) throw InvalidParameter("phi series lacks the history segment");
  const double slack = slack_rel * std::max(1.0, std::abs(diag.projection));

  RenewalBoundReport rep;
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = diag.origin; i < diag.phi.size(); ++i) {
    double rhs = 0.0;
    for (std::size_t j = 0; j <= N; ++j) rhs += weights[j] * std::abs(diag.phi[i - j]);
    rep.worst_excess = std::max(rep.worst_excess, std::abs(diag.phi[i]) - bound_constant * rhs);
  }
  rep.holds = rep.worst_excess <= slack;
  return rep;
}

std::vector<ContractionRow> contraction_monitor(const TimeSeries& closed, const TimeSeries& open_loop, ControlVariant measured,
                                      double reference, long period_steps, double delta, double slack) {
  if (!(reference > 0.0)) throw InvalidParameter("reference must be positive");
  if (period_steps < 1) throw InvalidParameter("period must span at least one step");
  const std::size_t n = std::min(closed.rows.size(), open_loop.rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (closed.rows[i].step != static_cast<long>(i) || open_loop.rows[i].step != static_cast<long>(i)) {
      throw InvalidParameter("contraction monitor needs series recorded at every step");
    }
  }
  const auto measure = [measured](const StepRecord& r) {
    return measured == ControlVariant::newborn_feedback ? r.f_boundary : r.y;
  };
  std::vector<ContractionRow> rows;
  for (long i = 0; static_cast<std::size_t>((i + 1) * period_steps) < n; ++i) {
    const auto s0 = static_cast<std::size_t>(i * period_steps);
    const auto s1 = static_cast<std::size_t>((i + 1) * period_steps);
    ContractionRow row;
    row.index = i;
    row.x = std::log(measure(closed.rows[s0]) / reference);
    row.x_next = std::log(measure(closed.rows[s1]) / reference);
    row.u = std::log(measure(open_loop.rows[s1]) / measure(open_loop.rows[s0]));
    row.rhs = std::abs(row.x) - std::min(std::abs(row.x), 2.0 * delta) + std::abs(row.u);
    row.holds = std::abs(row.x_next) <= row.rhs + slack;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace chemostat::ide
