#include "deloc/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "deloc/errors.hpp"
#include "deloc/rng.hpp"

namespace deloc {

EmpiricalSamples::EmpiricalSamples(Mat samples, std::string tag) : x(std::move(samples)), provenance(std::move(tag)) {
  if (x.rows() < 2) throw InputError("need at least 2 samples");
  if (!x.allFinite()) throw NumericError("samples contain non-finite entries");
}

std::vector<double> equalize(std::span<const double> sorted, std::size_t count) {
  if (count == 0 || count > sorted.size()) throw InputError("cannot equalize to " + std::to_string(count));
  const std::size_t step = sorted.size() / count;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = sorted[i * step];
  return out;
}

double w2_1d(std::span<const double> a_sorted, std::span<const double> b_sorted) {
  if (a_sorted.empty() || b_sorted.empty()) throw InputError("w2_1d needs non-empty samples");
  std::vector<double> tmp;
  if (a_sorted.size() != b_sorted.size()) {
    const bool a_big = a_sorted.size() > b_sorted.size();
    tmp = equalize(a_big ? a_sorted : b_sorted, a_big ? b_sorted.size() : a_sorted.size());
    (a_big ? a_sorted : b_sorted) = tmp;
  }
  if (a_sorted.size() != b_sorted.size()) throw InputError("sample counts differ after equalization");
  double s = 0.0;
  for (std::size_t i = 0; i < a_sorted.size(); ++i) {
    const double diff = a_sorted[i] - b_sorted[i];
    s += diff * diff;
  }
  return std::sqrt(s / static_cast<double>(a_sorted.size()));
}

namespace {

std::vector<double> sorted_column(const Mat& x, Eigen::Index j, Eigen::Index begin, Eigen::Index end) {
  std::vector<double> col(static_cast<std::size_t>(end - begin));
  for (Eigen::Index r = begin; r < end; ++r) col[static_cast<std::size_t>(r - begin)] = x(r, j);
  std::sort(col.begin(), col.end());
  return col;
}

double max_w2(const Mat& a, const Mat& b, Eigen::Index a0, Eigen::Index a1, Eigen::Index b0, Eigen::Index b1,
              std::vector<double>* per_coord, std::size_t* arg) {
  double best = -1.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const auto ca = sorted_column(a, j, a0, a1);
    const auto cb = sorted_column(b, j, b0, b1);
    const double w = w2_1d(ca, cb);
    if (per_coord) per_coord->push_back(w);
    if (w > best) {
      best = w;
      if (arg) *arg = static_cast<std::size_t>(j);
    }
  }
  return best;
}

}  // namespace

MarginalLowerBound w2_linf_lower(const EmpiricalSamples& a, const EmpiricalSamples& b) {
  if (a.dim() != b.dim()) throw InputError("sample dimensions differ");
  MarginalLowerBound out;
  out.w2 = max_w2(a.x, b.x, 0, a.x.rows(), 0, b.x.rows(), &out.per_coord_w2, &out.w2_coord);
  const Vec mean_gap = (a.x.colwise().mean() - b.x.colwise().mean()).transpose().cwiseAbs();
  Eigen::Index arg = 0;
  out.w1 = mean_gap.maxCoeff(&arg);
  out.w1_coord = static_cast<std::size_t>(arg);
  constexpr Eigen::Index kBlocks = 8;
  if (a.x.rows() >= 2 * kBlocks && b.x.rows() >= 2 * kBlocks) {
    std::vector<double> blocks;
    for (Eigen::Index k = 0; k < kBlocks; ++k) {
      blocks.push_back(max_w2(a.x, b.x, k * a.x.rows() / kBlocks, (k + 1) * a.x.rows() / kBlocks,
                              k * b.x.rows() / kBlocks, (k + 1) * b.x.rows() / kBlocks, nullptr, nullptr));
    }
    out.w2_se = batch_stderr(blocks);
  }
  return out;
}

GaussianUpperBound w2_linf_upper_gaussian(const GaussianPotential& p, double h, std::size_t n_mc,
                                          std::uint64_t seed) {
  if (h < 0.0) throw InputError("h must be >= 0");
  if (h > 1.0 / p.beta() * (1.0 + 1e-12)) throw InputError("h exceeds 1/beta");
  if (n_mc < 2) throw InputError("need at least 2 Monte Carlo draws");
  const auto d = static_cast<Eigen::Index>(p.dim());
  if (h == 0.0) return {0.0, 0.0};
  // M = Sigma^{1/2} - Sigma_h^{1/2} = U diag(l^{-1/2} - (l - h l^2/2)^{-1/2}) U^T.
  auto root_gap = [h](double l) { return 1.0 / std::sqrt(l) - 1.0 / std::sqrt(l * (1.0 - 0.5 * h * l)); };
  Mat m;
  Vec diag;
  if (p.is_diagonal()) {
    diag = p.precision().diagonal().unaryExpr(root_gap);
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es{Mat(p.precision())};
    m = es.eigenvectors() * es.eigenvalues().unaryExpr(root_gap).asDiagonal() * es.eigenvectors().transpose();
  }
  NoiseStream noise(seed, 0, static_cast<std::size_t>(d));
  constexpr Eigen::Index kBlock = 1024;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z(kBlock, d);
  Mat y;
  double sum = 0.0, sum_sq = 0.0;
  std::uint64_t k = 0;
  for (std::size_t start = 0; start < n_mc; start += kBlock) {
    const auto rows = static_cast<Eigen::Index>(std::min<std::size_t>(kBlock, n_mc - start));
    for (Eigen::Index r = 0; r < rows; ++r) noise.draw(k++, {z.row(r).data(), static_cast<std::size_t>(d)});
    if (m.size() > 0) {
      y.noalias() = z.topRows(rows) * m;
    } else {
      y = z.topRows(rows) * diag.asDiagonal();
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double v = y.row(r).cwiseAbs().maxCoeff();
      sum += v * v;
      sum_sq += v * v * v * v;
    }
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum / n;
  const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
  const double value = std::sqrt(mean);
  const double se = value > 0.0 ? std::sqrt(var / n) / (2.0 * value) : 0.0;
  return {value, se};
}

double k_marginal_bound(const DistanceBracket& bracket, std::size_t k) {
  if (k == 0) throw InputError("K must be >= 1");
  return std::sqrt(static_cast<double>(k)) * bracket.upper;
}

Estimate observable_bias(const Observable& f, const EmpiricalSamples& reference, const EmpiricalSamples& chain) {
  if (reference.dim() != chain.dim()) throw InputError("sample dimensions differ");
  if (f.min_dim() > chain.dim()) throw InputError("observable uses coordinates beyond the sample dimension");
  auto batch = [&f](const Mat& x) {
    BatchMeans bm(static_cast<std::uint64_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) bm.add(f(x.row(r).transpose()));
    return bm.estimate();
  };
  const Estimate ra = batch(reference.x);
  const Estimate rb = batch(chain.x);
  return {ra.value - rb.value, std::hypot(ra.se, rb.se)};
}

double max_norm_second_moment(const EmpiricalSamples& centered) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < centered.x.rows(); ++r) {
    const double v = centered.x.row(r).cwiseAbs().maxCoeff();
    s += v * v;
  }
  return s / static_cast<double>(centered.x.rows());
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary sample format assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("truncated sample file");
  return v;
}

}  // namespace

void write_samples(const std::filesystem::path& path, const EmpiricalSamples& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.n()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.dim()));
  for (Eigen::Index r = 0; r < s.x.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.x.cols(); ++c) put<double>(out, s.x(r, c));
  }
  std::ofstream side(path.string() + ".json");
  side << nlohmann::json{{"n", s.n()}, {"d", s.dim()}, {"provenance", s.provenance}}.dump(2) << "\n";
}

EmpiricalSamples read_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  const auto n = get<std::uint32_t>(in);
  const auto d = get<std::uint32_t>(in);
  Mat x(n, d);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = get<double>(in);
  }
  std::string tag;
  std::ifstream side(path.string() + ".json");
  if (side) {
    const auto meta = nlohmann::json::parse(side, nullptr, false);
    if (meta.is_object() && meta.contains("provenance")) tag = meta.at("provenance").get<std::string>();
  }
  return EmpiricalSamples(std::move(x), std::move(tag));
}

}  // namespace deloc
