#include <doctest.h>

#include "deloc/asymptotics.hpp"
#include "deloc/errors.hpp"
#include "oracles.hpp"

using namespace deloc;

namespace {

std::shared_ptr<GaussianPotential> gaussian_1d(double a) {
  SpMat prec(1, 1);
  prec.insert(0, 0) = a;
  return std::make_shared<GaussianPotential>(Vec::Zero(1), prec);
}

}  // namespace

TEST_CASE("Gaussian second moment has first-order coefficient -1/2") {
  // Var_h = 1 / (a - h a^2 / 2) = 1/a + h/2 + O(h^2) for every a.
  for (double a : {1.0, 3.0}) {
    const auto p = gaussian_1d(a);
    const auto rep = first_order_slope(*p, Observable::product(0, 0), 400000, 1);
    CHECK(rep.reference == "exact_gaussian");
    CHECK(std::abs(rep.formula_a.value + 0.5) <= 4.0 * rep.formula_a.se);
    CHECK(rep.formula_a.se < 0.01 * a);
    CHECK(rep.formula_b.value == doctest::Approx(-0.5));
    // Lap V is constant, so formula B has no Monte Carlo error beyond roundoff.
    CHECK(rep.formula_b.se < 1e-12);
    CHECK(rep.n_samples == 400000);
  }
}

TEST_CASE("coefficients do not depend on adding a constant to f") {
  const RotatedMixturePotential p(1, 0.25, 0.75, -0.25);
  PiReference ref;
  ref.burn_in = 2000;
  const auto f = Observable::product(0, 0);
  const auto a = first_order_slope(p, f, 100000, 3, ref);
  const auto b = first_order_slope(p, f.shifted(7.5), 100000, 3, ref);
  CHECK(a.formula_a.value == doctest::Approx(b.formula_a.value).epsilon(1e-8));
  CHECK(a.formula_b.value == doctest::Approx(b.formula_b.value).epsilon(1e-8));
  CHECK(b.mean_f.value == doctest::Approx(a.mean_f.value + 7.5).epsilon(1e-12));
  CHECK(a.reference == "mala");
}

TEST_CASE("mixture coefficients agree with the transfer-operator oracle") {
  const RotatedMixturePotential p(1, 0.25, 0.75, -0.25);
  const auto& mix = p.marginal();
  const double pi_m2 = p.stats().variance;
  auto bias = [&](double h) {
    const auto law = oracle::ula_stationary_1d([&](double t) { return mix.d1(t); }, h, -7.0, 7.0, 1000, 6000);
    return pi_m2 - law.moment(2);
  };
  // Richardson extrapolation removes the O(h^2) term of bias(h) / h.
  const double h = 0.05;
  const double oracle_slope = 2.0 * bias(h) / h - bias(2.0 * h) / (2.0 * h);

  PiReference ref;
  ref.burn_in = 5000;
  const auto rep = first_order_slope(p, Observable::product(0, 0), 2'000'000, 9, ref);
  CHECK(rep.acceptance_rate > 0.5);
  CHECK(std::abs(rep.formula_a.value - oracle_slope) <= 4.0 * rep.formula_a.se + 0.02 * std::abs(oracle_slope));
  CHECK(std::abs(rep.formula_b.value - oracle_slope) <= 4.0 * rep.formula_b.se + 0.02 * std::abs(oracle_slope));
  CHECK(rep.formula_b.se < 0.05 * std::abs(oracle_slope));
}

TEST_CASE("empirical biases match the exact Gaussian bias") {
  const auto p = gaussian_1d(1.0);
  StepConfig cfg;
  cfg.n_steps = 1'000'000;
  cfg.burn_in = 1000;
  cfg.seed = 4;
  const std::vector<double> hs{0.05, 0.1, 0.15, 0.2};
  const auto es = empirical_slope(*p, Observable::product(0, 0), hs, cfg, 1'000'000);
  REQUIRE(es.points.size() == 4);
  for (const auto& pt : es.points) {
    const double exact = 1.0 - 1.0 / (1.0 - pt.h / 2.0);
    CHECK(std::abs(pt.bias.value - exact) <= 4.0 * pt.bias.se);
  }
  CHECK(es.slope.value < -0.4);
  CHECK(es.slope.value > -0.65);
  CHECK_THROWS_AS(empirical_slope(*p, Observable::product(0, 0), {0.1, 0.2}, cfg, 1000), InputError);
}

TEST_CASE("coordinate sums over independent coordinates do not grow with K") {
  // Only x_0 is non-Gaussian, so Cov(x_0 + ... + x_{K-1}, lap V) is the same
  // for every K.
  std::vector<ScalarComponent> comps(32, ScalarComponent{1.0, 0.0, 0.0});
  comps[0] = {1.0, 1.0, 1.0};
  const auto p = make_product(comps);
  PiReference ref;
  ref.burn_in = 2000;
  const auto rep = sqrt_k_scaling_check(*p, {1, 4, 16}, 400000, 2, ref);
  REQUIRE(rep.resolved);
  CHECK(std::abs(rep.exponent) < std::max(3.0 * rep.exponent_se, 0.1));
  for (const auto& row : rep.rows) {
    CHECK(std::abs(row.slope.value - rep.rows[0].slope.value) <= 4.0 * std::hypot(row.slope.se, rep.rows[0].slope.se));
  }
}

TEST_CASE("Gaussian targets leave the K scaling unresolved") {
  const auto p = gaussian_1d(2.0);
  const auto rep = sqrt_k_scaling_check(*p, {1}, 10000, 1);
  CHECK_FALSE(rep.resolved);
  CHECK_THROWS_AS(sqrt_k_scaling_check(*p, {2}, 10000, 1), InputError);
}
