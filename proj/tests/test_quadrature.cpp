#include <doctest.h>

#include <cmath>
#include <random>

#include "chemostat/errors.hpp"
#include "chemostat/model.hpp"
#include "chemostat/quadrature.hpp"
#include "oracles.hpp"

using namespace chemostat;
using namespace chemostat::quadrature;

TEST_CASE("exp_moment agrees with Gauss-Legendre on both sides of the series switch") {
  for (double L : {-30.0, -5.0, -1.0000001, -0.9999999, -0.3, 0.0, 1e-9, 0.5, 0.9999999, 1.0000001, 7.0}) {
    for (int k = 0; k <= 2; ++k) {
      const double ref = oracle::gauss([&](double x) { return std::pow(x, k) * std::exp(L * x); }, 0.0, 1.0, 8);
      CHECK(oracle::rel_err(exp_moment(k, L), ref) < 1e-13);
    }
  }
  CHECK_THROWS_AS(exp_moment(3, 0.1), InvalidParameter);
}

TEST_CASE("cell_plain closed forms") {
  CHECK(cell_plain({2.0, 2.0, 0, 0.04}) == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(oracle::rel_err(cell_plain({1.0, std::exp(0.04), 0, 0.04}), std::expm1(0.04)) < 1e-14);
  CHECK(std::abs(cell_plain({1.0, 1.0 + 1e-14, 0, 0.04}) - 0.04) < 1e-12);
  CHECK_THROWS_AS(cell_plain({0.0, 1.0, 0, 0.04}), NonPositiveSample);
  CHECK_THROWS_AS(cell_plain({1.0, -1.0, 0, 0.04}), NonPositiveSample);
}

TEST_CASE("first_cells_plain extrapolates without the boundary node") {
  CHECK(first_cells_plain(3.0, 3.0, 0.04) == doctest::Approx(0.24).epsilon(1e-15));
  const double got = first_cells_plain(std::exp(-0.044), std::exp(-0.088), 0.04);
  CHECK(oracle::rel_err(got, -std::expm1(-0.088) / 1.1) < 1e-14);
  CHECK(oracle::rel_err(first_cells_plain(7.0 * 1.3, 7.0 * 0.9, 0.05), 7.0 * first_cells_plain(1.3, 0.9, 0.05)) <
        1e-14);
}

TEST_CASE("cell_age_weighted closed forms and branch continuity") {
  CHECK(cell_age_weighted({1.0, 1.0, 2, 0.04}) == doctest::Approx(0.004).epsilon(1e-14));
  // int_{0.08}^{0.12} a e^a da = [(a - 1) e^a]
  const double ref = (0.12 - 1.0) * std::exp(0.12) - (0.08 - 1.0) * std::exp(0.08);
  CHECK(oracle::rel_err(cell_age_weighted({std::exp(0.08), std::exp(0.12), 2, 0.04}), ref) < 1e-13);
  const double equal = cell_age_weighted({1.0, 1.0, 3, 0.04});
  CHECK(oracle::rel_err(cell_age_weighted({1.0, 1.0 + 1e-10, 3, 0.04}), equal) < 1e-8);
}

TEST_CASE("first_cells_age_weighted closed forms") {
  CHECK(first_cells_age_weighted(1.0, 1.0, 0.04) == doctest::Approx(0.0032).epsilon(1e-14));
  // int_0^{0.08} a e^{-a} da = 1 - (1 + a) e^{-a}
  const double ref = 1.0 - 1.08 * std::exp(-0.08);
  CHECK(oracle::rel_err(first_cells_age_weighted(std::exp(-0.04), std::exp(-0.08), 0.04), ref) < 1e-12);
  CHECK(oracle::rel_err(first_cells_age_weighted(2.5 * 1.1, 2.5 * 1.4, 0.04),
                        2.5 * first_cells_age_weighted(1.1, 1.4, 0.04)) < 1e-14);
}

TEST_CASE("cell_reflected closed forms and linearity") {
  CHECK(cell_reflected({1.0, 1.0, 25, 0.04}, 2.0) == doctest::Approx(0.0392).epsilon(1e-13));
  // int_1^{1.04} (2 - a) e^a da = [(3 - a) e^a]
  const double ref = (3.0 - 1.04) * std::exp(1.04) - 2.0 * std::exp(1.0);
  const CellSample s{std::exp(1.0), std::exp(1.04), 25, 0.04};
  CHECK(oracle::rel_err(cell_reflected(s, 2.0), ref) < 1e-13);
  CHECK(oracle::rel_err(cell_reflected(s, 2.0), 2.0 * cell_plain(s) - cell_age_weighted(s)) < 1e-13);
}

TEST_CASE("randomised exactness of every cell rule against Gauss-Legendre") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> amp(0.01, 100.0), rate(-5.0, 5.0);
  std::uniform_int_distribution<int> cell(0, 49);
  const double h = 0.04;
  for (int it = 0; it < 300; ++it) {
    const double C = amp(rng);
    const double sigma = rate(rng);
    const int j = cell(rng);
    auto f = [&](double a) { return C * std::exp(sigma * a); };
    const double lo = j * h, hi = lo + h;
    const CellSample s{f(lo), f(hi), j, h};
    CHECK(oracle::rel_err(cell_plain(s), oracle::gauss(f, lo, hi)) < 1e-11);
    CHECK(oracle::rel_err(cell_age_weighted(s), oracle::gauss([&](double a) { return a * f(a); }, lo, hi)) < 1e-11);
    CHECK(oracle::rel_err(cell_reflected(s, 2.0), oracle::gauss([&](double a) { return (2.0 - a) * f(a); }, lo, hi)) <
          1e-11);
    CHECK(oracle::rel_err(first_cells_plain(f(h), f(2 * h), h), oracle::gauss(f, 0.0, 2 * h)) < 1e-11);
    CHECK(oracle::rel_err(first_cells_age_weighted(f(h), f(2 * h), h),
                          oracle::gauss([&](double a) { return a * f(a); }, 0.0, 2 * h)) < 1e-11);
    const HatPair hp = cell_hat(s);
    CHECK(oracle::rel_err(hp.left, oracle::gauss([&](double a) { return (hi - a) / h * f(a); }, lo, hi)) < 1e-11);
    CHECK(oracle::rel_err(hp.right, oracle::gauss([&](double a) { return (a - lo) / h * f(a); }, lo, hi)) < 1e-11);
  }
}

TEST_CASE("integrate_profile on the reference equilibrium") {
  const ModelParams p = reference_params();
  const AgeGrid grid = AgeGrid::from_step(2.0, 0.04);
  AgeProfile eq{0.04, {}};
  for (int j = 0; j < grid.nodes(); ++j) eq.values.push_back(std::exp(-1.1 * grid.age(j)));
  const auto k = p.birth_modulus.sample_aligned(grid);
  CHECK(std::abs(integrate_profile(eq, k) - 1.0) < 1e-9);
  const double y_ref = -std::expm1(-2.2) / 1.1;
  CHECK(std::abs(integrate_profile(eq) - y_ref) < 1e-12);
  CHECK(std::abs(integrate_profile(eq) - 0.808361) < 1e-6);

  AgeProfile ones{0.04, std::vector<double>(51, 1.0)};
  CHECK(std::abs(integrate_profile(ones) - 2.0) < 1e-12);

  // node 0 is never read
  eq.values[0] = -123.0;
  CHECK(std::abs(integrate_profile(eq, k) - 1.0) < 1e-9);
  eq.values[7] = 0.0;
  CHECK_THROWS_AS(integrate_profile(eq, k), NonPositiveProfile);
}

TEST_CASE("integrate_profile with a linear weight matches a fine oracle on exponential-per-cell data") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const AgeGrid grid = AgeGrid::from_step(2.0, 0.04);
  AgeProfile prof{0.04, {}};
  for (int j = 0; j < grid.nodes(); ++j) prof.values.push_back(u(rng));
  std::vector<double> weight;
  for (int j = 0; j < grid.nodes(); ++j) weight.push_back(1.0 + 0.5 * grid.age(j));
  auto interp = [&](double a) {
    // exponential interpolation; the first two cells use the extrapolation through nodes 1, 2
    int j = std::min(static_cast<int>(a / 0.04), 49);
    if (j == 0) j = 1;
    const double fl = prof.values[static_cast<std::size_t>(j)], fr = prof.values[static_cast<std::size_t>(j + 1)];
    return fl * std::pow(fr / fl, (a - j * 0.04) / 0.04);
  };
  double ref = 0.0;
  for (int c = 0; c < 50; ++c) {
    ref += oracle::gauss([&](double a) { return (1.0 + 0.5 * a) * interp(a); }, c * 0.04, (c + 1) * 0.04, 1);
  }
  CHECK(oracle::rel_err(integrate_profile(prof, weight), ref) < 1e-8);
}
