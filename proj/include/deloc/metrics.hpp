#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deloc/observables.hpp"
#include "deloc/potentials.hpp"
#include "deloc/stats.hpp"

namespace deloc {

/// n x d sample matrix (rows are draws) with a free-form provenance tag.
struct EmpiricalSamples {
  Mat x;
  std::string provenance;

  EmpiricalSamples() = default;
  EmpiricalSamples(Mat samples, std::string tag = {});
  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
};

struct DistanceBracket {
  double lower = 0.0;
  double upper = 0.0;
  double lower_se = 0.0;
  double upper_se = 0.0;
  std::string lower_method;
  std::string upper_method;
};

/// Exact W2 between two empirical measures on the line given sorted inputs:
/// sqrt(mean_i (a_(i) - b_(i))^2). Unequal sizes are equalized by taking
/// every floor(n_big / n_small)-th element of the larger sample.
double w2_1d(std::span<const double> a_sorted, std::span<const double> b_sorted);

/// Every step-th element starting at 0, truncated to `count` values.
std::vector<double> equalize(std::span<const double> sorted, std::size_t count);

struct MarginalLowerBound {
  /// max_j W2(a_j, b_j) and the coordinate attaining it.
  double w2 = 0.0;
  std::size_t w2_coord = 0;
  double w2_se = 0.0;
  /// max_j |mean_j(a) - mean_j(b)|, a lower bound on W1 (hence W2) in l_inf.
  double w1 = 0.0;
  std::size_t w1_coord = 0;
  std::vector<double> per_coord_w2;
};

/// Marginal lower bounds on W2,l_inf between the laws behind a and b. The
/// standard error of the max-coordinate W2 comes from recomputing it on 8
/// contiguous blocks of rows.
MarginalLowerBound w2_linf_lower(const EmpiricalSamples& a, const EmpiricalSamples& b);

struct GaussianUpperBound {
  double value = 0.0;
  double se = 0.0;
};

/// Monte Carlo estimate of sqrt(E|(Sigma^{1/2} - Sigma_h^{1/2}) Z|_inf^2), an
/// upper bound on W2,l_inf(pi, pi_h) for the Gaussian target p.
GaussianUpperBound w2_linf_upper_gaussian(const GaussianPotential& p, double h, std::size_t n_mc,
                                          std::uint64_t seed);

/// sqrt(K) * upper: bounds W2 between any K-dimensional marginals.
double k_marginal_bound(const DistanceBracket& bracket, std::size_t k);

/// Mean of f over reference samples a minus mean over chain samples b; the
/// standard error combines i.i.d. error on a with 32-batch means on b.
Estimate observable_bias(const Observable& f, const EmpiricalSamples& reference, const EmpiricalSamples& chain);

/// Mean over rows of |row|_inf^2 (rows assumed centered).
double max_norm_second_moment(const EmpiricalSamples& centered);

/// Little-endian binary: u32 n, u32 d, then n*d f64 row-major. A JSON sidecar
/// (path + ".json") records n, d and the provenance tag.
void write_samples(const std::filesystem::path& path, const EmpiricalSamples& s);
EmpiricalSamples read_samples(const std::filesystem::path& path);

}  // namespace deloc
