#include "deloc/stats.hpp"

#include <cmath>
#include <limits>

#include "deloc/errors.hpp"

namespace deloc {

BatchMeans::BatchMeans(std::uint64_t n_total, std::size_t n_batches) : n_total_(n_total) {
  if (n_total == 0) throw InputError("batch means needs at least one sample");
  if (n_batches == 0) throw InputError("batch means needs at least one batch");
  n_batches_ = static_cast<std::size_t>(std::min<std::uint64_t>(n_batches, n_total));
  sums_.assign(n_batches_, 0.0);
  counts_.assign(n_batches_, 0);
  next_boundary_ = n_total_ / n_batches_;
  for (std::size_t b = 0; b < n_batches_; ++b) {
    counts_[b] = (b + 1) * n_total_ / n_batches_ - b * n_total_ / n_batches_;
  }
}

void BatchMeans::advance() {
  if (current_ + 1 < n_batches_) {
    ++current_;
    next_boundary_ = (current_ + 1) * n_total_ / n_batches_;
  } else {
    next_boundary_ = std::numeric_limits<std::uint64_t>::max();
  }
}

void BatchMeans::merge(const BatchMeans& other) {
  sums_.insert(sums_.end(), other.sums_.begin(), other.sums_.end());
  counts_.insert(counts_.end(), other.counts_.begin(), other.counts_.end());
  n_total_ += other.n_total_;
  filled_ += other.filled_;
  n_batches_ += other.n_batches_;
  current_ = n_batches_ - 1;
  next_boundary_ = std::numeric_limits<std::uint64_t>::max();
}

std::uint64_t BatchMeans::count() const { return filled_; }

double BatchMeans::mean() const {
  if (filled_ != n_total_) throw InputError("batch means queried before all samples were added");
  double s = 0.0;
  for (double v : sums_) s += v;
  return s / static_cast<double>(n_total_);
}

double BatchMeans::se() const {
  std::vector<double> means(sums_.size());
  for (std::size_t b = 0; b < sums_.size(); ++b) means[b] = sums_[b] / static_cast<double>(counts_[b]);
  return batch_stderr(means, counts_);
}

double batch_stderr(std::span<const double> values, std::span<const std::uint64_t> weights) {
  if (values.size() != weights.size()) throw InputError("batch values and weights differ in length");
  const std::size_t b = values.size();
  if (b < 2) return 0.0;
  double total = 0.0;
  double m = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    total += static_cast<double>(weights[k]);
    m += static_cast<double>(weights[k]) * values[k];
  }
  m /= total;
  double ss = 0.0;
  for (std::size_t k = 0; k < b; ++k) ss += static_cast<double>(weights[k]) * (values[k] - m) * (values[k] - m);
  return std::sqrt(ss / static_cast<double>(b - 1) / total);
}

double batch_stderr(std::span<const double> values) {
  std::vector<std::uint64_t> ones(values.size(), 1);
  return batch_stderr(values, ones);
}

Estimate covariance_estimate(const BatchMeans& fg, const BatchMeans& f, const BatchMeans& g) {
  const auto counts = f.batch_counts();
  if (fg.batch_counts().size() != counts.size() || g.batch_counts().size() != counts.size()) {
    throw InputError("covariance estimate needs matching batch layouts");
  }
  const double mf = f.mean();
  const double mg = g.mean();
  const double value = fg.mean() - mf * mg;
  std::vector<double> lin(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double c = static_cast<double>(counts[b]);
    lin[b] = (fg.batch_sums()[b] - mg * f.batch_sums()[b] - mf * g.batch_sums()[b]) / c;
  }
  return {value, batch_stderr(lin, counts)};
}

Estimate fit_through_origin(std::span<const double> x, std::span<const double> y, std::span<const double> se) {
  if (x.size() != y.size() || x.size() != se.size() || x.empty()) throw InputError("fit inputs differ in length");
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(se[k] > 0.0)) throw InputError("fit standard errors must be positive");
    const double w = 1.0 / (se[k] * se[k]);
    sxy += w * x[k] * y[k];
    sxx += w * x[k] * x[k];
  }
  return {sxy / sxx, 1.0 / std::sqrt(sxx)};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> weights) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw InputError("line fit needs >= 2 matched points");
  if (!weights.empty() && weights.size() != n) throw InputError("line fit weights differ in length");
  auto w = [&](std::size_t k) { return weights.empty() ? 1.0 : weights[k]; };
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sw += w(k);
    sx += w(k) * x[k];
    sy += w(k) * y[k];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += w(k) * (x[k] - mx) * (x[k] - mx);
    sxy += w(k) * (x[k] - mx) * (y[k] - my);
    syy += w(k) * (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw InputError("line fit needs distinct x values");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - fit.intercept - fit.slope * x[k];
    rss += w(k) * r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  if (weights.empty()) {
    fit.slope_stderr = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
  } else {
    // Weights are inverse variances.
    fit.slope_stderr = std::sqrt(1.0 / sxx);
  }
  return fit;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y, std::span<const double> y_stderr) {
  std::vector<double> lx(x.size()), ly(y.size()), w;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw InputError("log-log fit needs positive values");
    lx[k] = std::log(x[k]);
    ly[k] = std::log(y[k]);
  }
  if (!y_stderr.empty()) {
    if (y_stderr.size() != y.size()) throw InputError("log-log stderr differs in length");
    w.resize(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
      // Delta method: se(log y) = se(y) / y.
      const double rel = std::max(y_stderr[k] / y[k], 1e-12);
      w[k] = 1.0 / (rel * rel);
    }
  }
  return fit_line(lx, ly, w);
}

}  // namespace deloc
