#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace deloc {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Batch-means estimator for the mean of a stationary series whose length is
/// known up front. Samples are split into `n_batches` contiguous batches of
/// near-equal size. Batches from several chains are pooled by merge().
class BatchMeans {
 public:
  static constexpr std::size_t kDefaultBatches = 32;

  BatchMeans() = default;
  explicit BatchMeans(std::uint64_t n_total, std::size_t n_batches = kDefaultBatches);

  void add(double x) {
    sums_[current_] += x;
    if (++filled_ == next_boundary_) advance();
  }
  void merge(const BatchMeans& other);

  std::uint64_t count() const;
  double mean() const;
  /// Standard error from the spread of batch means; 0 with < 2 batches.
  double se() const;
  Estimate estimate() const { return {mean(), se()}; }
  std::span<const double> batch_sums() const { return sums_; }
  std::span<const std::uint64_t> batch_counts() const { return counts_; }

 private:
  void advance();

  std::vector<double> sums_;
  std::vector<std::uint64_t> counts_;
  std::size_t current_ = 0;
  std::uint64_t filled_ = 0;
  std::uint64_t next_boundary_ = 0;
  std::uint64_t n_total_ = 0;
  std::size_t n_batches_ = 0;
};

/// Standard error of a statistic given per-batch values and weights, the
/// weights being batch sizes.
double batch_stderr(std::span<const double> values, std::span<const std::uint64_t> weights);

/// Same as batch_stderr with equal weights.
double batch_stderr(std::span<const double> values);

/// E[fg] - E[f]E[g] from three pooled batch-means accumulators with identical
/// batch layout; the standard error uses the linearized batch statistic.
Estimate covariance_estimate(const BatchMeans& fg, const BatchMeans& f, const BatchMeans& g);

/// Weighted least squares fit y = s x through the origin with weights 1/se^2.
Estimate fit_through_origin(std::span<const double> x, std::span<const double> y, std::span<const double> se);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = a + b x (weights optional).
LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> weights = {});

/// log-log regression of y against x (both must be positive).
LineFit fit_loglog(std::span<const double> x, std::span<const double> y, std::span<const double> y_stderr = {});

}  // namespace deloc
