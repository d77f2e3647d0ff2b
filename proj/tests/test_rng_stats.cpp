#include <doctest.h>

#include <cmath>
#include <vector>

#include "deloc/rng.hpp"
#include "deloc/stats.hpp"

using namespace deloc;

TEST_CASE("noise stream is random access in the step index") {
  NoiseStream seq(42, 3, 2, 1);
  std::vector<double> all;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    double z[2], u;
    seq.draw(k, z, {&u, 1});
    all.insert(all.end(), {z[0], z[1], u});
  }
  NoiseStream jump(42, 3, 2, 1);
  for (std::uint64_t k : {999ull, 17ull, 500ull, 0ull, 501ull}) {
    double z[2], u;
    jump.draw(k, z, {&u, 1});
    CHECK(z[0] == all[3 * k]);
    CHECK(z[1] == all[3 * k + 1]);
    CHECK(u == all[3 * k + 2]);
  }
  NoiseStream other(42, 4, 2, 1);
  double z[2], u;
  other.draw(0, z, {&u, 1});
  CHECK(z[0] != all[0]);
}

TEST_CASE("normals have unit variance") {
  NoiseStream s(7, 0, 1);
  double m = 0.0, m2 = 0.0, m4 = 0.0;
  const int n = 400000;
  for (int k = 0; k < n; ++k) {
    double z;
    s.draw(static_cast<std::uint64_t>(k), {&z, 1});
    m += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  CHECK(std::abs(m / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(m2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("philox matches the published known-answer vector") {
  // Random123 kat_vectors: philox4x32_10 with zero counter and key.
  const auto out = Philox4x32::encrypt({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
  const auto ones = Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("batch means agree with direct formulas") {
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(std::sin(0.37 * i) + 0.001 * i);
  BatchMeans bm(xs.size(), 10);
  for (double x : xs) bm.add(x);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  CHECK(bm.mean() == doctest::Approx(mean).epsilon(1e-13));
  std::vector<double> bmeans;
  for (int b = 0; b < 10; ++b) {
    double s = 0.0;
    for (int i = 0; i < 100; ++i) s += xs[b * 100 + i];
    bmeans.push_back(s / 100);
  }
  double v = 0.0;
  for (double m : bmeans) v += (m - mean) * (m - mean);
  CHECK(bm.se() == doctest::Approx(std::sqrt(v / 9.0 / 10.0)).epsilon(1e-12));

  BatchMeans a(500, 5), b(500, 5);
  for (int i = 0; i < 500; ++i) a.add(xs[i]);
  for (int i = 500; i < 1000; ++i) b.add(xs[i]);
  a.merge(b);
  CHECK(a.count() == 1000);
  CHECK(a.mean() == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("batch means standard error matches iid theory") {
  NoiseStream s(1, 0, 1);
  const std::uint64_t n = 320000;
  BatchMeans bm(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    double z;
    s.draw(k, {&z, 1});
    bm.add(z);
  }
  // The se estimate from 32 batches has relative spread about 1/sqrt(62).
  CHECK(bm.se() == doctest::Approx(1.0 / std::sqrt(static_cast<double>(n))).epsilon(0.45));
}

TEST_CASE("covariance estimate of a deterministic pair") {
  BatchMeans fg(1000, 10), f(1000, 10), g(1000, 10);
  for (int i = 0; i < 1000; ++i) {
    const double x = (i % 7) - 3.0, y = 2.0 * x + 1.0;
    fg.add(x * y);
    f.add(x);
    g.add(y);
  }
  double ex = 0, exx = 0;
  for (int i = 0; i < 1000; ++i) {
    ex += (i % 7) - 3.0;
    exx += ((i % 7) - 3.0) * ((i % 7) - 3.0);
  }
  ex /= 1000;
  exx /= 1000;
  CHECK(covariance_estimate(fg, f, g).value == doctest::Approx(2.0 * (exx - ex * ex)).epsilon(1e-12));
}

TEST_CASE("line fits") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 - 2.0 * v);
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-2.0));
  CHECK(f.intercept == doctest::Approx(3.0));
  CHECK(f.r2 == doctest::Approx(1.0));

  std::vector<double> py;
  for (double v : x) py.push_back(0.7 * std::pow(v, 0.5));
  CHECK(fit_loglog(x, py).slope == doctest::Approx(0.5));

  const std::vector<double> se{0.1, 0.1, 0.1, 0.1, 0.1};
  std::vector<double> oy;
  for (double v : x) oy.push_back(-0.5 * v);
  const auto o = fit_through_origin(x, oy, se);
  CHECK(o.value == doctest::Approx(-0.5));
  // Var(s) = 1 / sum(x^2 / se^2).
  CHECK(o.se == doctest::Approx(std::sqrt(1.0 / (55.0 / 0.01))));
}
