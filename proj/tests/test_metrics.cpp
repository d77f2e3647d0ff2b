#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "deloc/errors.hpp"
#include "deloc/metrics.hpp"
#include "deloc/samplers.hpp"
#include "oracles.hpp"

using namespace deloc;

TEST_CASE("sorted matching is the optimal 1D coupling") {
  std::mt19937 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t size = 1; size <= 8; ++size) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> a(size), b(size);
      for (auto& v : a) v = n(rng);
      for (auto& v : b) v = 2.0 * n(rng) + 0.5;
      const double brute = oracle::w2_brute_force(a, b);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(w2_1d(a, b) == doctest::Approx(brute).epsilon(1e-12));
    }
  }
}

TEST_CASE("unequal sample sizes are equalized by striding") {
  const std::vector<double> big{0, 1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(equalize(big, 3) == std::vector<double>{0, 3, 6});
  CHECK(equalize(big, 4) == std::vector<double>{0, 2, 4, 6});
  const std::vector<double> small{0.5, 3.5};
  CHECK(w2_1d(big, small) == doctest::Approx(std::sqrt((0.25 + 0.25) / 2.0)));
  CHECK_THROWS_AS(equalize(small, 3), InputError);
}

TEST_CASE("marginal lower bounds locate the shifted coordinate") {
  std::mt19937 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Mat a(4000, 3), b(4000, 3);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      a(i, j) = n(rng);
      b(i, j) = n(rng) + (j == 1 ? 0.5 : 0.0);
    }
  }
  const auto lb = w2_linf_lower(EmpiricalSamples(a), EmpiricalSamples(b));
  CHECK(lb.w2_coord == 1);
  CHECK(lb.w1_coord == 1);
  CHECK(lb.w2 == doctest::Approx(0.5).epsilon(0.1));
  CHECK(lb.w1 == doctest::Approx(0.5).epsilon(0.1));
  CHECK(lb.w2_se > 0.0);
  CHECK(lb.w2_se < 0.1);
  CHECK(lb.per_coord_w2.size() == 3);
  CHECK(lb.w2 == *std::max_element(lb.per_coord_w2.begin(), lb.per_coord_w2.end()));
  CHECK(lb.w1 <= lb.w2 + 1e-12);
}

TEST_CASE("Gaussian synchronous upper bound in one dimension") {
  const double a = 2.0, h = 0.4;
  SpMat prec(1, 1);
  prec.insert(0, 0) = a;
  const GaussianPotential p(Vec::Zero(1), prec);
  const auto ub = w2_linf_upper_gaussian(p, h, 200000, 7);
  // sqrt(E[(sigma - sigma_h)^2 Z^2]) = |sigma - sigma_h| exactly.
  const double closed = std::abs(1.0 / std::sqrt(a) - 1.0 / std::sqrt(a - 0.5 * h * a * a));
  CHECK(ub.value == doctest::Approx(closed).epsilon(0.01));
  CHECK(std::abs(ub.value - closed) <= 4.0 * ub.se);
}

TEST_CASE("Gaussian upper bound dominates the marginal lower bound") {
  SpMat prec(4, 4);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < 4; ++i) {
    t.emplace_back(i, i, 3.0);
    if (i + 1 < 4) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
  }
  prec.setFromTriplets(t.begin(), t.end());
  const GaussianPotential p(Vec::Zero(4), prec);
  const double h = 0.15;
  const auto ub = w2_linf_upper_gaussian(p, h, 50000, 1);
  // Exact per-coordinate W2 between centered Gaussians is |sd - sd_h|.
  const Mat s = Mat(prec).inverse();
  const Mat sh = biased_covariance(prec, h);
  double lower = 0.0;
  for (int i = 0; i < 4; ++i) lower = std::max(lower, std::abs(std::sqrt(s(i, i)) - std::sqrt(sh(i, i))));
  CHECK(ub.value >= lower);
}

TEST_CASE("observable bias and max-norm moments") {
  Mat ref(4, 2), chain(64, 2);
  ref << 1, 0, 1, 0, 3, 0, 3, 0;
  chain.setConstant(1.0);
  const auto bias = observable_bias(Observable::coordinate(0), EmpiricalSamples(ref), EmpiricalSamples(chain));
  CHECK(bias.value == doctest::Approx(1.0));
  CHECK(bias.se > 0.0);
  Mat c(2, 3);
  c << 1, -2, 0.5, 0, 0.1, -0.3;
  CHECK(max_norm_second_moment(EmpiricalSamples(c)) == doctest::Approx((4.0 + 0.09) / 2.0));
  DistanceBracket br;
  br.upper = 0.3;
  CHECK(k_marginal_bound(br, 4) == doctest::Approx(0.6));
}

TEST_CASE("binary sample files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "deloc_samples_test";
  std::filesystem::create_directories(dir);
  Mat x(5, 3);
  x.setRandom();
  x(2, 1) = -0.0;
  x(4, 2) = 1e-300;
  write_samples(dir / "s.bin", EmpiricalSamples(x, "unit test"));
  const auto back = read_samples(dir / "s.bin");
  CHECK(back.x == x);
  CHECK(back.provenance == "unit test");
  CHECK(std::filesystem::exists(dir / "s.bin.json"));
  CHECK(std::filesystem::file_size(dir / "s.bin") == 8 + 5 * 3 * 8);
  CHECK_THROWS(read_samples(dir / "missing.bin"));
  std::filesystem::remove_all(dir);
}
