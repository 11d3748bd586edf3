#include <doctest.h>

#include <cmath>
#include <random>

#include "chemostat/errors.hpp"
#include "chemostat/pde_sim.hpp"
#include "oracles.hpp"

using namespace chemostat;

namespace {

const AgeGrid kGrid = AgeGrid::from_step(2.0, 0.04);

ControllerSpec open_loop(double d) {
  ControllerSpec s;
  s.variant = ControlVariant::open_loop;
  s.d_star_used = d;
  s.reference = 1.0;
  s.period = 0.4;
  return s;
}

ControllerSpec output_feedback(const Equilibrium& eq) {
  ControllerSpec s;
  s.variant = ControlVariant::output_feedback;
  s.d_star_used = eq.d_star;
  s.reference = eq.y_star;
  s.period = 0.4;
  return s;
}

}  // namespace

TEST_CASE("transport factor per cell") {
  const ModelParams p = reference_params();
  const Discretization disc = Discretization::build(p, kGrid);
  SimState st;
  st.profile = AgeProfile{0.04, std::vector<double>(51, 1.0)};
  st.current_d = 1.0;
  const AgeProfile next = transport_step(st, disc);
  for (int j = 1; j <= 50; ++j) CHECK(oracle::rel_err(next.values[static_cast<std::size_t>(j)], std::exp(-0.044)) < 1e-15);

  ModelParams still = p;
  still.mortality = PiecewiseLinear::constant(0.0, 2.0);
  const Discretization disc0 = Discretization::build(still, kGrid);
  for (int j = 0; j <= 50; ++j) st.profile.values[static_cast<std::size_t>(j)] = 1.0 + j;
  st.current_d = 0.0;
  const AgeProfile shifted = transport_step(st, disc0);
  for (int j = 1; j <= 50; ++j) CHECK(shifted.values[static_cast<std::size_t>(j)] == 1.0 + (j - 1));
}

TEST_CASE("transport is exact on the equilibrium") {
  const ModelParams p = reference_params();
  const Equilibrium eq = solve_d_star(p, kGrid);
  SimState st;
  st.profile = eq.f_star;
  st.current_d = eq.d_star;
  const AgeProfile next = transport_step(st, Discretization::build(p, kGrid));
  for (int j = 1; j <= 50; ++j) {
    CHECK(oracle::rel_err(next.values[static_cast<std::size_t>(j)], std::exp(-1.1 * kGrid.age(j))) < 1e-13);
  }
}

TEST_CASE("boundary and output integrals") {
  const ModelParams p = reference_params();
  const Equilibrium eq = solve_d_star(p, kGrid);
  const Discretization disc = Discretization::build(p, kGrid);
  CHECK(std::abs(renewal_boundary(eq.f_star, disc) - 1.0) < 1e-9);
  CHECK(std::abs(measured_output(eq.f_star, disc) - 0.808361) < 1e-6);
  CHECK(oracle::rel_err(renewal_boundary(eq.f_star.scaled(2.5), disc), 2.5 * renewal_boundary(eq.f_star, disc)) <
        1e-14);
  AgeProfile flat{0.04, std::vector<double>(51, 3.0)};
  CHECK(std::abs(measured_output(flat, disc) - 6.0) < 1e-12);

  // scenario-1 f0 against a fine trapezoid of k f0: second-order agreement
  const InitialFamily fam = make_initial_family(0.2, 0.8, 1.0, p);
  const double fine = oracle::trapezoid([&](double a) { return p.birth_modulus(a) * fam(a); }, 0.0, 2.0, 20000);
  const AgeGrid fine_grid = AgeGrid::from_step(2.0, 0.01);
  const double coarse_err = oracle::rel_err(renewal_boundary(fam.sample(kGrid), disc), fine);
  const double fine_err =
      oracle::rel_err(renewal_boundary(fam.sample(fine_grid), Discretization::build(p, fine_grid)), fine);
  CHECK(coarse_err < 1e-3);
  CHECK(coarse_err / fine_err > 12.0);
}

TEST_CASE("open-loop run from f* is a discrete fixed point") {
  const ModelParams p = reference_params();
  const Equilibrium eq = solve_d_star(p, kGrid);
  double worst = 0.0;
  SimOptions opt;
  opt.observer = [&](const SimState& s, const StepRecord&) {
    for (std::size_t j = 0; j < s.profile.values.size(); ++j) {
      worst = std::max(worst, oracle::rel_err(s.profile.values[j], eq.f_star.values[j]));
    }
  };
  const TimeSeries ts = run_simulation(p, kGrid, eq, open_loop(eq.d_star), eq.f_star, 20.0, opt);
  CHECK(ts.rows.size() == 501);
  CHECK(worst <= 1e-10);
}

TEST_CASE("closed loop: determinism, hold, clamp, stride") {
  const ModelParams p = reference_params();
  const Equilibrium eq = solve_d_star(p, kGrid);
  const AgeProfile f0 = make_initial_profile(1.0, 4.0, 1.0, p, kGrid);
  const ControllerSpec ctl = output_feedback(eq);
  const TimeSeries a = run_simulation(p, kGrid, eq, ctl, f0, 8.0);
  const TimeSeries b = run_simulation(p, kGrid, eq, ctl, f0, 8.0);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].d == b.rows[i].d);
    CHECK(a.rows[i].y == b.rows[i].y);
    CHECK(a.rows[i].d >= 0.5);
    CHECK(a.rows[i].d <= 1.5);
    if (i % 10 != 0) CHECK(a.rows[i].d == a.rows[i - 1].d);
    CHECK(a.rows[i].t == doctest::Approx(0.04 * static_cast<double>(i)));
  }
  SimOptions opt;
  opt.stride = 7;
  const TimeSeries s = run_simulation(p, kGrid, eq, ctl, f0, 8.0, opt);
  CHECK(s.rows.size() == 30);  // steps 0, 7, ..., 196 and the final step 200
  CHECK(s.back().step == 200);
  CHECK(s.back().y == a.back().y);
}

TEST_CASE("closed loop equals the scaled open-loop run") {
  // f(t) = exp(-int_0^t (D - D*)) * f_open(t) when both start from f0
  const ModelParams p = reference_params();
  const Equilibrium eq = solve_d_star(p, kGrid);
  const AgeProfile f0 = make_initial_profile(0.2, 0.8, 1.0, p, kGrid);
  std::vector<AgeProfile> open_profiles;
  SimOptions rec;
  rec.observer = [&](const SimState& s, const StepRecord&) { open_profiles.push_back(s.profile); };
  run_simulation(p, kGrid, eq, open_loop(eq.d_star), f0, 10.0, rec);

  double integral = 0.0;
  double worst = 0.0;
  long idx = 0;
  SimOptions cmp;
  cmp.observer = [&](const SimState& s, const StepRecord& r) {
    const auto& ref = open_profiles[static_cast<std::size_t>(idx)].values;
    for (std::size_t j = 0; j < ref.size(); ++j) {
      worst = std::max(worst, oracle::rel_err(s.profile.values[j], std::exp(-integral) * ref[j]));
    }
    integral += (r.d - eq.d_star) * 0.04;
    ++idx;
  };
  run_simulation(p, kGrid, eq, output_feedback(eq), f0, 10.0, cmp);
  CHECK(worst <= 1e-10);
}

TEST_CASE("open-loop superposition") {
  const ModelParams p = reference_params();
  const Equilibrium eq = solve_d_star(p, kGrid);
  const AgeProfile f1 = make_initial_profile(0.2, 0.8, 1.0, p, kGrid);
  const AgeProfile f2 = make_initial_profile(1.0, 4.0, 1.0, p, kGrid);
  AgeProfile sum = f1;
  for (std::size_t j = 0; j < sum.values.size(); ++j) sum.values[j] += f2.values[j];
  const auto a = run_simulation(p, kGrid, eq, open_loop(1.0), f1, 6.0);
  const auto b = run_simulation(p, kGrid, eq, open_loop(1.0), f2, 6.0);
  const auto c = run_simulation(p, kGrid, eq, open_loop(1.0), sum, 6.0);
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    CHECK(oracle::rel_err(c.rows[i].y, a.rows[i].y + b.rows[i].y) < 1e-10);
    CHECK(oracle::rel_err(c.rows[i].f_boundary, a.rows[i].f_boundary + b.rows[i].f_boundary) < 1e-10);
  }
}

TEST_CASE("precondition and abort diagnostics") {
  const ModelParams p = reference_params();
  const Equilibrium eq = solve_d_star(p, kGrid);
  ControllerSpec bad = output_feedback(eq);
  bad.period = 0.41;
  CHECK_THROWS_AS(run_simulation(p, kGrid, eq, bad, eq.f_star, 4.0), InvalidParameter);
  CHECK_THROWS_AS(run_simulation(p, kGrid, eq, output_feedback(eq), eq.f_star, 4.01), InvalidParameter);

  AgeProfile broken = eq.f_star;
  broken.values[30] = -1e-3;
  try {
    run_simulation(p, kGrid, eq, output_feedback(eq), broken, 4.0);
    FAIL("expected NonPositiveProfile");
  } catch (const NonPositiveProfile& e) {
    CHECK(e.step() == 0);
    CHECK(e.node() == 30);
  }
}
