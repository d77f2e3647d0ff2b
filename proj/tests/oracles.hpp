#pragma once

// Reference computations that share no code with the library. Slow and
// simple on purpose.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Exact squared W2 between two uniform empirical measures of equal size by
/// enumerating all matchings.
inline double w2_brute_force(std::vector<double> a, const std::vector<double>& b) {
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[perm[i]]) * (a[i] - b[perm[i]]);
    best = std::min(best, s / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

/// k-hop neighborhoods from the support of (I + A)^k.
inline std::vector<std::set<std::size_t>> neighborhoods_by_matrix_power(
    std::size_t d, const std::vector<std::pair<std::size_t, std::size_t>>& edges, std::size_t k) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Identity(static_cast<int>(d), static_cast<int>(d));
  for (auto [i, j] : edges) {
    a(static_cast<int>(i), static_cast<int>(j)) = 1;
    a(static_cast<int>(j), static_cast<int>(i)) = 1;
  }
  Eigen::MatrixXi p = Eigen::MatrixXi::Identity(static_cast<int>(d), static_cast<int>(d));
  for (std::size_t s = 0; s < k; ++s) p = ((p * a).array() > 0).cast<int>().matrix();
  std::vector<std::set<std::size_t>> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (p(static_cast<int>(i), static_cast<int>(j))) out[i].insert(j);
    }
  }
  return out;
}

/// Stationary law of the 1D ULA kernel x -> N(x - h V'(x), 2h) on a uniform
/// grid over [lo, hi], by power iteration on the row-normalized transition
/// matrix. Returns (grid, weights summing to 1).
struct GridLaw {
  std::vector<double> x, w;
  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m += w[i] * x[i];
    return m;
  }
  double moment(int k) const {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m += w[i] * std::pow(x[i], k);
    return m;
  }
};

inline GridLaw ula_stationary_1d(const std::function<double(double)>& dv, double h, double lo, double hi,
                                 int n = 1500, int iters = 4000) {
  GridLaw g;
  const double dx = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) g.x.push_back(lo + i * dx);
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = g.x[i] - h * dv(g.x[i]);
    for (int j = 0; j < n; ++j) {
      const double z = (g.x[j] - m);
      p(i, j) = std::exp(-z * z / (4.0 * h));
    }
    p.row(i) /= p.row(i).sum();
  }
  Eigen::RowVectorXd w = Eigen::RowVectorXd::Constant(n, 1.0 / n);
  for (int it = 0; it < iters; ++it) {
    Eigen::RowVectorXd next = w * p;
    const double change = (next - w).cwiseAbs().sum();
    w = next;
    if (change < 1e-15) break;
  }
  g.w.assign(w.data(), w.data() + n);
  return g;
}

/// Density exp(-V) normalized on a grid (trapezoid weights).
inline GridLaw target_on_grid(const std::function<double(double)>& v, double lo, double hi, int n = 20001) {
  GridLaw g;
  const double dx = (hi - lo) / (n - 1);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    g.x.push_back(lo + i * dx);
    g.w.push_back(std::exp(-v(g.x.back())) * ((i == 0 || i == n - 1) ? 0.5 : 1.0));
    z += g.w.back();
  }
  for (double& w : g.w) w /= z;
  return g;
}

/// Stationary second moments of the 1D Gaussian pair X' = aX + s xi,
/// Y' = bY + c xi + r zeta (xi, zeta independent standard normals).
struct PairMoments {
  double xx, yy, xy;
  double gap_sq() const { return xx + yy - 2.0 * xy; }
};

inline PairMoments linear_pair_stationary(double a, double s, double b, double c, double r) {
  return {s * s / (1.0 - a * a), (c * c + r * r) / (1.0 - b * b), s * c / (1.0 - a * b)};
}

/// Central finite-difference gradient.
template <typename F>
Eigen::VectorXd fd_gradient(F&& f, const Eigen::VectorXd& x, double eps = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += eps;
    b(i) -= eps;
    g(i) = (f(a) - f(b)) / (2.0 * eps);
  }
  return g;
}

}  // namespace oracle
