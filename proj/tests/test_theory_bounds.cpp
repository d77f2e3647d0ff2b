#include <doctest.h>

#include <cmath>
#include <functional>

#include "deloc/errors.hpp"
#include "deloc/theory_bounds.hpp"

using namespace deloc;

namespace {

// Direct transcription of the bound, evaluated term by term.
double reference_bound(double alpha, double beta, double h, std::size_t d, double grad_sq, std::size_t n,
                       const std::function<std::size_t(std::size_t)>& s) {
  const double e2 = std::exp(2.0);
  auto r = [&](std::size_t i) {
    return static_cast<std::size_t>(std::ceil(e2 * i * h * beta + std::log(std::sqrt(static_cast<double>(d)))));
  };
  const double q = std::exp(-alpha * h);
  double num = 0.0;
  for (std::size_t i = 1; i <= n; ++i) num += std::pow(q, i - 1.0) * std::sqrt(static_cast<double>(s(r(i))));
  const double denom = 1.0 - 2.0 * std::pow(q, static_cast<double>(n)) * std::sqrt(static_cast<double>(s(r(n))));
  if (denom <= 0.0) return NAN;
  const double err = h * h * std::sqrt(grad_sq) + 3.0 * std::pow(h, 1.5) * std::sqrt(std::log(2.0 * d));
  return 2.0 * beta * num / denom * err;
}

BoundInputs path_inputs(std::size_t d, double alpha, double beta, double h) {
  BoundInputs in;
  in.alpha = alpha;
  in.beta = beta;
  in.h = h;
  in.d = d;
  in.profile = sparsity_profile(InteractionGraph::path(d), d);
  return in;
}

}  // namespace

TEST_CASE("r index") {
  CHECK(r_index(1, 0.01, 5.0, 1) == 1);
  CHECK(r_index(10, 0.01, 5.0, 100) == static_cast<std::size_t>(std::ceil(std::exp(2.0) * 0.5 + std::log(10.0))));
  CHECK_THROWS_AS(r_index(0, 0.1, 1.0, 4), InputError);
}

TEST_CASE("bias bound matches an independent evaluation") {
  for (std::size_t d : {4u, 64u, 300u}) {
    auto in = path_inputs(d, 1.0, 6.0, 0.01);
    in.grad_inf_sq = 3.7;
    for (std::size_t n : {1u, 50u, 400u, 2000u}) {
      const auto got = bias_bound(in, n);
      const double want = reference_bound(1.0, 6.0, 0.01, d, 3.7, n,
                                          [&](std::size_t k) { return std::min<std::size_t>(2 * k + 1, d); });
      CAPTURE(d);
      CAPTURE(n);
      if (std::isnan(want)) {
        CHECK_FALSE(got.feasible);
        CHECK(std::isnan(got.value));
      } else {
        CHECK(got.feasible);
        CHECK(got.value == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("optimized bound picks the minimum of the curve") {
  auto in = path_inputs(64, 1.0, 5.0, 0.01);
  const auto rep = bias_bound_optimized(in);
  REQUIRE(rep.feasible);
  CHECK(rep.n_max == static_cast<std::size_t>(std::ceil(10.0 * std::log(4.0 * 8.0) / 0.01)));
  CHECK(rep.n_proof == static_cast<std::size_t>(std::ceil(std::log(4.0 * 8.0) / 0.01)));
  CHECK(rep.curve.size() == rep.n_max);
  double best = INFINITY;
  for (const auto& v : rep.curve) {
    if (v.feasible) best = std::min(best, v.value);
  }
  CHECK(rep.best_value == best);
  CHECK(rep.curve[rep.best_n - 1].value == best);
  CHECK(rep.at_proof_n.n == rep.n_proof);
  CHECK(rep.grad_inf_sq_used == doctest::Approx(std::pow(2.0 * 5.0 * std::sqrt(std::log(128.0)), 2)));
  CHECK(rep.polynomial_branch > 0.0);
  CHECK(rep.dense_branch > 0.0);
}

TEST_CASE("infeasible search ranges are reported") {
  auto in = path_inputs(256, 1.0, 4.0, 0.001);
  in.n_cap = 5;
  const auto rep = bias_bound_optimized(in);
  CHECK(rep.n_max == 5);
  CHECK_FALSE(rep.feasible);
  CHECK(std::isnan(rep.best_value));
  for (const auto& v : rep.curve) CHECK(v.contraction >= 1.0);
}

TEST_CASE("dense profile is never better than the path profile") {
  auto sparse = path_inputs(128, 1.0, 5.0, 0.02);
  auto dense = sparse;
  dense.profile = constant_profile(128, 128);
  const auto a = bias_bound_optimized(sparse);
  const auto b = bias_bound_optimized(dense);
  REQUIRE(a.feasible);
  if (b.feasible) CHECK(a.best_value <= b.best_value);
}

TEST_CASE("product bound branches") {
  const auto simple = product_bias_bound(1.0, 2.0, 0.1, 10);
  CHECK(simple.simplified);
  CHECK(simple.value == doctest::Approx(8.0 * std::sqrt(0.1 * std::log(20.0))));
  const auto loose = product_bias_bound(1.0, 2.0, 0.4, 10);
  CHECK_FALSE(loose.simplified);
  CHECK(loose.value == doctest::Approx(2.0 * std::sqrt(32.0 / 3.0 * 0.16 + 3.2) * std::sqrt(std::log(20.0))));
}

TEST_CASE("helper bounds") {
  CHECK(grad_inf_bound(4.0, 2.0, 8) == doctest::Approx(2.0 * std::sqrt(std::log(16.0))));
  CHECK(one_step_error_bound(0.04, 9.0, 2) == doctest::Approx(0.008 * 3.0 + 0.12 * std::sqrt(std::log(4.0))));
  Mat m(2, 2);
  m << 1, -2, 0.5, 0.25;
  CHECK(linf_operator_norm(m) == doctest::Approx(3.0));
}

TEST_CASE("input validation") {
  auto in = path_inputs(8, 1.0, 2.0, 0.6);
  CHECK_THROWS_AS(bias_bound(in, 1), InputError);
  in.h = 0.1;
  in.profile = constant_profile(4, 4);
  CHECK_THROWS_AS(bias_bound(in, 1), InputError);
  in.profile = constant_profile(8, 8);
  CHECK_THROWS_AS(bias_bound(in, 0), InputError);
}

TEST_CASE("propagator estimates hold along MALA paths and random points") {
  const auto p = tridiagonal_example(24, 1.0, 1.0);
  PropagatorOptions opts;
  opts.h = 0.05 / p->beta();
  opts.max_n = 60;
  opts.trials = 10;
  opts.seed = 3;
  const auto rep = propagator_check(*p, opts);
  CHECK(rep.ok());
  CHECK(rep.checks > 0);
  CHECK(rep.max_ratio_p <= 1.0);
  CHECK(rep.max_ratio_j <= 1.0);
  CHECK(rep.identity_norm == doctest::Approx(1.0));
  CHECK(rep.rows.size() == opts.max_n);
  opts.random_points = true;
  CHECK(propagator_check(*p, opts).ok());
}

TEST_CASE("propagator check rejects steps above 1/beta") {
  const auto p = tridiagonal_example(8, 1.0, 0.0);
  PropagatorOptions opts;
  opts.h = 2.0 / p->beta();
  CHECK_THROWS_AS(propagator_check(*p, opts), InputError);
}
