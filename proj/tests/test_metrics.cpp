#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "chemostat/errors.hpp"
#include "chemostat/metrics.hpp"
#include "chemostat/model.hpp"
#include "chemostat/pde_sim.hpp"

using namespace chemostat;
using namespace chemostat::metrics;

TEST_CASE("log deviation and ratio envelope") {
  const AgeGrid grid = AgeGrid::from_step(2.0, 0.04);
  const Equilibrium eq = solve_d_star(reference_params(), grid);
  CHECK(log_deviation(eq.f_star, eq.f_star) == 0.0);
  CHECK(std::abs(log_deviation(eq.f_star.scaled(std::exp(0.3)), eq.f_star) - 0.3) < 1e-14);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    AgeProfile p = eq.f_star;
    for (auto& v : p.values) v *= std::exp(u(rng));
    const RatioEnvelope env = ratio_envelope(p, eq.f_star);
    CHECK(log_deviation(p, eq.f_star) == std::max(std::log(env.max), -std::log(env.min)));
  }
  AgeProfile bad = eq.f_star;
  bad.values[3] = 0.0;
  CHECK_THROWS_AS(log_deviation(bad, eq.f_star), NonPositiveProfile);
}

TEST_CASE("theoretical rates") {
  const TheoreticalRates r = theoretical_rates(1.0, 0.4, 0.5, 1.5, 2.0);
  CHECK(std::abs(r.delta - 0.1) < 1e-15);
  CHECK(r.delta_tilde == r.delta);
  CHECK(r.sigma == r.delta_tilde / (4.0 * 0.4));
  const TheoreticalRates slow = theoretical_rates(1.0, 0.4, 0.5, 1.5, 0.1);
  CHECK(std::abs(slow.delta_tilde - 0.04) < 1e-15);
  CHECK_THROWS_AS(theoretical_rates(1.5, 0.4, 0.5, 1.5, 1.0), DegenerateMargin);
  CHECK_THROWS_AS(theoretical_rates(0.4, 0.4, 0.5, 1.5, 1.0), DegenerateMargin);
}

TEST_CASE("decay fit on an exact exponential") {
  std::vector<double> t, w;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.05 * i);
    w.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  const DecayFit fit = fit_decay_rate(t, w, 2.0);
  CHECK(!fit.degenerate);
  CHECK(std::abs(fit.rate - 0.7) < 1e-12);
  CHECK(std::abs(fit.intercept - std::log(3.0)) < 1e-10);
  CHECK(fit.samples == 161);

  std::vector<double> zeros(t.size(), 0.0);
  const DecayFit flat = fit_decay_rate(t, zeros, 0.0);
  CHECK(flat.degenerate);
  CHECK(flat.rate == std::numeric_limits<double>::infinity());
}

TEST_CASE("exponential envelope") {
  std::vector<double> t{0.0, 1.0, 2.0, 3.0}, w{1.0, 0.5, 0.4, 0.1};
  const EnvelopeCheck e = exponential_envelope(t, w, 0.2);
  CHECK(e.holds);
  CHECK(e.kappa == 1.0);  // attained at t = 0
  CHECK(e.worst_excess <= 0.0);
}
