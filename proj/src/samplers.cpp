#include "deloc/samplers.hpp"

#include <cmath>
#include <limits>

#include "deloc/errors.hpp"
#include "deloc/parallel.hpp"
#include "deloc/rng.hpp"

namespace deloc {

std::uint64_t default_burn_in(double alpha, double h) {
  return std::max<std::uint64_t>(static_cast<std::uint64_t>(std::ceil(10.0 / (alpha * h))), 10000);
}

std::uint64_t resolved_burn_in(const StepConfig& cfg, double alpha) {
  return cfg.burn_in ? *cfg.burn_in : default_burn_in(alpha, cfg.h);
}

void validate_step_config(const StepConfig& cfg, const Potential& p) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) throw InputError("step size h must be positive");
  if (cfg.h > 1.0 / p.beta() * (1.0 + 1e-12)) {
    throw InputError("step size h=" + std::to_string(cfg.h) + " exceeds 1/beta=" + std::to_string(1.0 / p.beta()));
  }
  if (cfg.n_chains == 0) throw InputError("need at least one chain");
  if (resolved_burn_in(cfg, p.alpha()) >= cfg.n_steps) {
    throw InputError("no steps after burn-in: n_steps=" + std::to_string(cfg.n_steps) +
                     " burn_in=" + std::to_string(resolved_burn_in(cfg, p.alpha())));
  }
}

namespace {

bool diverged(VecRef x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(std::abs(x(i)) <= kDivergenceThreshold)) return true;
  }
  return false;
}

[[noreturn]] void throw_diverged(VecRef x, std::uint64_t iteration) {
  const double m = x.cwiseAbs().maxCoeff();
  throw DivergedError("chain diverged at iteration " + std::to_string(iteration) +
                          " (|x|_inf = " + std::to_string(m) + ")",
                      iteration);
}

std::span<double> as_span(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Per-chain post-burn-in statistics. Batches are contiguous blocks of the
// chain; merging concatenates batches so chains are pooled in order.
class Accumulator {
 public:
  Accumulator(std::size_t d, std::uint64_t n, const RunOptions& opts, std::size_t store_every)
      : d_(d), n_(n), store_every_(store_every), opts_(&opts), grad_inf_(n) {
    n_batches_ = static_cast<std::size_t>(std::min<std::uint64_t>(BatchMeans::kDefaultBatches, n));
    s1_ = Mat::Zero(d, n_batches_);
    s2_ = Mat::Zero(d, n_batches_);
    for (std::size_t b = 0; b < n_batches_; ++b) counts_.push_back((b + 1) * n / n_batches_ - b * n / n_batches_);
    boundary_ = counts_[0];
    if (opts.track_covariance) cross_ = Mat::Zero(d, d);
    for (std::size_t k = 0; k < opts.n_outputs(); ++k) fn_.emplace_back(n);
    scratch_.resize(opts.vector_functional ? opts.vector_functional->names.size() : 0);
    if (store_every_ > 0) stored_.reserve(((n + store_every_ - 1) / store_every_) * d);
  }

  void add(VecRef x, VecRef g) {
    s1_.col(batch_) += x;
    s2_.col(batch_) += x.cwiseAbs2();
    if (opts_->track_covariance) cross_.selfadjointView<Eigen::Lower>().rankUpdate(x);
    const std::size_t ns = opts_->functionals.size();
    for (std::size_t k = 0; k < ns; ++k) fn_[k].add(opts_->functionals[k].fn(x, g));
    if (!scratch_.empty()) {
      opts_->vector_functional->fn(x, g, scratch_.data());
      for (std::size_t k = 0; k < scratch_.size(); ++k) fn_[ns + k].add(scratch_[k]);
    }
    const double gi = g.cwiseAbs().maxCoeff();
    grad_inf_.add(gi * gi);
    max_grad_inf_ = std::max(max_grad_inf_, gi);
    if (store_every_ > 0 && seen_ % store_every_ == 0) stored_.insert(stored_.end(), x.data(), x.data() + d_);
    ++seen_;
    if (seen_ == boundary_ && batch_ + 1 < n_batches_) boundary_ += counts_[++batch_];
  }

  void merge(Accumulator&& other) {
    Mat s1(d_, s1_.cols() + other.s1_.cols());
    s1 << s1_, other.s1_;
    s1_ = std::move(s1);
    Mat s2(d_, s2_.cols() + other.s2_.cols());
    s2 << s2_, other.s2_;
    s2_ = std::move(s2);
    counts_.insert(counts_.end(), other.counts_.begin(), other.counts_.end());
    if (cross_.size() > 0) cross_ += other.cross_;
    for (std::size_t k = 0; k < fn_.size(); ++k) fn_[k].merge(other.fn_[k]);
    grad_inf_.merge(other.grad_inf_);
    max_grad_inf_ = std::max(max_grad_inf_, other.max_grad_inf_);
    stored_.insert(stored_.end(), other.stored_.begin(), other.stored_.end());
    total_ += other.total_;
  }

  std::uint64_t total() const { return total_; }

  void finalize_moments(Vec& mean, Vec& mean_se, Vec& var, Vec& var_se) const {
    const double n = static_cast<double>(total_);
    const auto nb = static_cast<std::size_t>(s1_.cols());
    mean = s1_.rowwise().sum() / n;
    const Vec m2 = s2_.rowwise().sum() / n;
    var = m2 - mean.cwiseAbs2();
    mean_se.resize(d_);
    var_se.resize(d_);
    std::vector<double> vm(nb), vv(nb);
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t b = 0; b < nb; ++b) {
        const double c = static_cast<double>(counts_[b]);
        vm[b] = s1_(i, b) / c;
        // Batch value of the second central moment linearized about the pooled mean.
        vv[b] = s2_(i, b) / c - 2.0 * mean(i) * vm[b] + mean(i) * mean(i);
      }
      mean_se(i) = batch_stderr(vm, counts_);
      var_se(i) = batch_stderr(vv, counts_);
    }
  }

  void finalize(ChainRun& run) const {
    finalize_moments(run.mean, run.mean_se, run.variance, run.variance_se);
    if (cross_.size() > 0) {
      Mat c = cross_.selfadjointView<Eigen::Lower>();
      run.covariance = c / static_cast<double>(total_) - run.mean * run.mean.transpose();
    }
    run.functionals = fn_;
    run.grad_inf_sq = grad_inf_.estimate();
    run.max_grad_inf = max_grad_inf_;
    run.samples = samples();
  }

  Mat samples() const {
    const auto rows = static_cast<Eigen::Index>(d_ == 0 ? 0 : stored_.size() / d_);
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        stored_.data(), rows, static_cast<Eigen::Index>(d_));
  }

 private:
  std::size_t d_;
  std::uint64_t n_;
  std::size_t store_every_;
  const RunOptions* opts_;
  std::size_t n_batches_ = 0;
  Mat s1_, s2_, cross_;
  std::vector<std::uint64_t> counts_;
  std::vector<BatchMeans> fn_;
  std::vector<double> scratch_;
  BatchMeans grad_inf_;
  double max_grad_inf_ = 0.0;
  std::vector<double> stored_;
  std::uint64_t seen_ = 0;
  std::uint64_t total_ = n_;
  std::size_t batch_ = 0;
  std::uint64_t boundary_ = 0;
};

Vec initial_point(const Potential& p, const InitSpec& init, std::uint64_t seed, std::size_t chain, double h) {
  const std::size_t d = p.dim();
  if (init.kind == InitSpec::Kind::Point) {
    if (init.point.size() == 0) return Vec::Zero(d);
    if (static_cast<std::size_t>(init.point.size()) != d) throw InputError("initial point has wrong dimension");
    if (!init.point.allFinite()) throw NumericError("initial point is not finite");
    return init.point;
  }
  const auto gp = gaussian_view(p);
  if (!gp) throw InputError("exact initialization requires a Gaussian target");
  GaussianSampler sampler(*gp, init.kind == InitSpec::Kind::ExactPiH ? h : 0.0);
  NoiseStream noise(seed, stream_id(chain, StreamRole::Init), d);
  Vec z(d), x(d);
  noise.draw(0, as_span(z));
  sampler.transform(z, x);
  return x;
}

struct ChainResult {
  Accumulator acc;
  Vec final_state;
  std::uint64_t accepted = 0;
};

template <typename RunOne>
ChainRun run_chains(const Potential& p, const StepConfig& cfg, std::uint64_t burn, const RunOptions& opts,
                    RunOne&& run_one) {
  const std::size_t d = p.dim();
  const std::uint64_t n = cfg.n_steps - burn;
  std::vector<std::optional<ChainResult>> results(cfg.n_chains);
  parallel_for(cfg.n_chains, resolve_threads(cfg.threads), [&](std::size_t c) {
    ChainResult r{Accumulator(d, n, opts, cfg.store_every), Vec(), 0};
    run_one(c, r);
    results[c].emplace(std::move(r));
  });
  ChainRun run;
  run.config = cfg;
  run.burn_in = burn;
  run.samples_per_chain = n;
  run.final_states.resize(static_cast<Eigen::Index>(cfg.n_chains), static_cast<Eigen::Index>(d));
  std::uint64_t accepted = 0;
  Accumulator& total = results[0]->acc;
  for (std::size_t c = 0; c < cfg.n_chains; ++c) {
    run.final_states.row(static_cast<Eigen::Index>(c)) = results[c]->final_state.transpose();
    accepted += results[c]->accepted;
    if (c > 0) total.merge(std::move(results[c]->acc));
  }
  total.finalize(run);
  run.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.n_steps * cfg.n_chains);
  return run;
}

}  // namespace

Vec ula_step(const Potential& p, VecRef x, double h, VecRef noise, std::uint64_t iteration) {
  if (static_cast<std::size_t>(noise.size()) != p.dim()) throw InputError("noise has wrong dimension");
  Vec out = x - h * p.grad(x) + std::sqrt(2.0 * h) * noise;
  if (diverged(out)) throw_diverged(out, iteration);
  return out;
}

ChainRun run_chain(const Potential& p, const StepConfig& cfg, const InitSpec& init, const RunOptions& opts) {
  validate_step_config(cfg, p);
  const std::uint64_t burn = resolved_burn_in(cfg, p.alpha());
  const std::size_t d = p.dim();
  const double h = cfg.h;
  const double s = std::sqrt(2.0 * h);
  return run_chains(p, cfg, burn, opts, [&](std::size_t c, ChainResult& r) {
    NoiseStream noise(cfg.seed, stream_id(c, StreamRole::Main), d);
    Vec x = initial_point(p, init, cfg.seed, c, h);
    Vec g(d), z(d);
    p.grad_into(x, g);
    for (std::uint64_t k = 0; k < cfg.n_steps; ++k) {
      if (k >= burn) r.acc.add(x, g);
      noise.draw(k, as_span(z));
      x.noalias() -= h * g;
      x.noalias() += s * z;
      if (diverged(x)) throw_diverged(x, k + 1);
      p.grad_into(x, g);
    }
    r.final_state = std::move(x);
    r.accepted = cfg.n_steps;
  });
}

namespace {

// One MALA transition in place. Returns true on acceptance.
bool mala_transition(const Potential& p, double h, Vec& x, Vec& g, double& vx, const Vec& z, double u, Vec& y,
                     Vec& gy) {
  const double s = std::sqrt(2.0 * h);
  y = x - h * g + s * z;
  if (diverged(y)) return false;
  p.grad_into(y, gy);
  const double vy = p.value(y);
  const double log_fwd = -0.5 * z.squaredNorm();
  const double log_bwd = -(x - y + h * gy).squaredNorm() / (4.0 * h);
  const double log_ratio = vx - vy + log_bwd - log_fwd;
  if (std::isfinite(log_ratio) && std::log(u) < log_ratio) {
    x.swap(y);
    g.swap(gy);
    vx = vy;
    return true;
  }
  return false;
}

Vec mala_warm_start(const Potential& p, double h, std::uint64_t steps, std::uint64_t seed, std::size_t chain) {
  const std::size_t d = p.dim();
  NoiseStream noise(seed, stream_id(chain, StreamRole::Warmup), d, 1);
  Vec x = Vec::Zero(d), g(d), z(d), y(d), gy(d);
  p.grad_into(x, g);
  double vx = p.value(x);
  double u = 0.0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    noise.draw(k, as_span(z), {&u, 1});
    mala_transition(p, h, x, g, vx, z, u, y, gy);
  }
  return x;
}

}  // namespace

ChainRun mala_chain(const Potential& p, const StepConfig& cfg, const InitSpec& init, const RunOptions& opts) {
  validate_step_config(cfg, p);
  const std::uint64_t burn = resolved_burn_in(cfg, p.alpha());
  const std::size_t d = p.dim();
  ChainRun run = run_chains(p, cfg, burn, opts, [&](std::size_t c, ChainResult& r) {
    NoiseStream noise(cfg.seed, stream_id(c, StreamRole::Main), d, 1);
    Vec x = initial_point(p, init, cfg.seed, c, cfg.h);
    Vec g(d), z(d), y(d), gy(d);
    p.grad_into(x, g);
    double vx = p.value(x);
    double u = 0.0;
    for (std::uint64_t k = 0; k < cfg.n_steps; ++k) {
      if (k >= burn) r.acc.add(x, g);
      noise.draw(k, as_span(z), {&u, 1});
      if (mala_transition(p, cfg.h, x, g, vx, z, u, y, gy)) ++r.accepted;
    }
    r.final_state = std::move(x);
  });
  if (run.acceptance_rate < 0.01) {
    run.warnings.push_back("MALA acceptance rate " + std::to_string(run.acceptance_rate) +
                           " is below 1%; step too large for reference use");
  }
  return run;
}

double default_mala_step(const Potential& p) {
  return 0.5 / p.beta() * std::min(1.0, std::cbrt(64.0 / static_cast<double>(p.dim())));
}

ChainRun exact_gaussian_run(const GaussianPotential& p, double h_bias, const StepConfig& cfg,
                            const RunOptions& opts) {
  if (cfg.n_chains == 0) throw InputError("need at least one chain");
  const std::uint64_t burn = cfg.burn_in.value_or(0);
  if (burn >= cfg.n_steps) throw InputError("no draws requested");
  if (h_bias < 0.0) throw InputError("h_bias must be >= 0");
  const std::size_t d = p.dim();
  const GaussianSampler sampler(p, h_bias);
  StepConfig used = cfg;
  used.h = h_bias;
  used.burn_in = burn;
  return run_chains(p, used, burn, opts, [&](std::size_t c, ChainResult& r) {
    NoiseStream noise(cfg.seed, stream_id(c, StreamRole::Main), d);
    Vec x(d), g(d), z(d);
    for (std::uint64_t k = burn; k < cfg.n_steps; ++k) {
      noise.draw(k, as_span(z));
      sampler.transform(z, x);
      p.grad_into(x, g);
      r.acc.add(x, g);
    }
    r.final_state = std::move(x);
    r.accepted = cfg.n_steps;
  });
}

// ---------------------------------------------------------------- Gaussian

SpMat biased_precision(const SpMat& a, double h) {
  SpMat a2 = a * a;
  SpMat out = a - (0.5 * h) * a2;
  out.prune(0.0);
  return out;
}

Mat biased_covariance(const SpMat& a, double h) {
  Eigen::SelfAdjointEigenSolver<Mat> es{Mat(a)};
  const Vec& lam = es.eigenvalues();
  Vec inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double denom = lam(i) * (1.0 - 0.5 * h * lam(i));
    if (!(denom > 0.0)) throw NumericError("step size too large: pi_h is not defined");
    inv(i) = 1.0 / denom;
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

GaussianSampler::GaussianSampler(const GaussianPotential& p, double h_bias)
    : mean_(p.mean()), diagonal_(p.is_diagonal()) {
  const SpMat prec = h_bias > 0.0 ? biased_precision(p.precision(), h_bias) : p.precision();
  if (diagonal_) {
    inv_sqrt_diag_.resize(prec.rows());
    for (Eigen::Index i = 0; i < prec.rows(); ++i) {
      const double v = prec.coeff(i, i);
      if (!(v > 0.0)) throw NumericError("precision is not positive definite");
      inv_sqrt_diag_(i) = 1.0 / std::sqrt(v);
    }
    return;
  }
  llt_.compute(prec);
  if (llt_.info() != Eigen::Success) throw NumericError("precision is not positive definite");
}

void GaussianSampler::transform(VecRef z, VecOut out) const {
  if (diagonal_) {
    out = mean_ + inv_sqrt_diag_.cwiseProduct(z);
    return;
  }
  // P A P^T = L L^T, so x = m + P^T L^{-T} z has covariance A^{-1}.
  const Vec w = llt_.matrixU().solve(z);
  out = mean_ + llt_.permutationPinv() * w;
}

Mat GaussianSampler::sample(std::size_t n, std::uint64_t seed, std::uint32_t stream) const {
  const std::size_t d = dim();
  NoiseStream noise(seed, stream, d);
  Mat out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vec z(d), x(d);
  for (std::size_t k = 0; k < n; ++k) {
    noise.draw(k, as_span(z));
    transform(z, x);
    out.row(static_cast<Eigen::Index>(k)) = x.transpose();
  }
  return out;
}

// ---------------------------------------------------------------- coupling

double CoupledRun::root_se(const Estimate& sq) {
  const double r = root(sq);
  return r > 0.0 ? sq.se / (2.0 * r) : std::sqrt(std::max(sq.se, 0.0));
}

namespace {

// Exact Ornstein-Uhlenbeck transition over time h for a Gaussian target, in
// the eigenbasis of the precision. The driving Brownian increment B_h =
// sqrt(h) xi is shared with ULA; the remaining variance comes from zeta.
struct OuTransition {
  OuTransition(const GaussianPotential& gp, double h) : mean(gp.mean()), diagonal(gp.is_diagonal()) {
    Vec lam;
    if (diagonal) {
      lam = gp.precision().diagonal();
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> es{Mat(gp.precision())};
      lam = es.eigenvalues();
      basis = es.eigenvectors();
    }
    const auto d = lam.size();
    decay.resize(d);
    shared.resize(d);
    resid.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double l = lam(i);
      decay(i) = std::exp(-l * h);
      const double var = -std::expm1(-2.0 * l * h) / l;
      const double cov = std::sqrt(2.0) * -std::expm1(-l * h) / l;  // Cov(noise, B_h)
      shared(i) = cov / std::sqrt(h);
      resid(i) = std::sqrt(std::max(var - shared(i) * shared(i), 0.0));
    }
  }
  void to_eigen(VecRef y, VecOut eta) const {
    if (diagonal) {
      eta = y - mean;
    } else {
      eta.noalias() = basis.transpose() * (y - mean);
    }
  }
  void from_eigen(VecRef eta, VecOut y) const {
    if (diagonal) {
      y = mean + eta;
    } else {
      y = mean;
      y.noalias() += basis * eta;
    }
  }
  void rotate_noise(VecRef xi, VecOut out) const {
    if (diagonal) {
      out = xi;
    } else {
      out.noalias() = basis.transpose() * xi;
    }
  }

  Vec mean;
  bool diagonal;
  Mat basis;
  Vec decay, shared, resid;
};

struct CoupledResult {
  Accumulator acc_x, acc_y;
  BatchMeans gap_inf, gap_l2, step_err;
};

}  // namespace

CoupledRun coupled_bias_run(const Potential& p, const StepConfig& cfg, const Reference& ref) {
  validate_step_config(cfg, p);
  const std::uint64_t burn = resolved_burn_in(cfg, p.alpha());
  const std::uint64_t n = cfg.n_steps - burn;
  const std::size_t d = p.dim();
  const double h = cfg.h;
  const double s = std::sqrt(2.0 * h);

  std::shared_ptr<const GaussianPotential> gp;
  std::optional<OuTransition> ou;
  if (ref.kind == Reference::Kind::ExactGaussian) {
    gp = gaussian_view(p);
    if (!gp) throw ConfigError("/reference", "exact_gaussian reference requires a Gaussian target");
    ou.emplace(*gp, h);
  } else if (ref.substeps == 0) {
    throw ConfigError("/reference/substeps", "substeps must be >= 1");
  }
  const std::size_t sub = ref.kind == Reference::Kind::FineUla ? ref.substeps : 1;
  const RunOptions no_opts;

  std::vector<std::optional<CoupledResult>> results(cfg.n_chains);
  parallel_for(cfg.n_chains, resolve_threads(cfg.threads), [&](std::size_t c) {
    CoupledResult r{Accumulator(d, n, no_opts, cfg.store_every), Accumulator(d, n, no_opts, cfg.store_every),
                    BatchMeans(n), BatchMeans(n), BatchMeans(n)};
    Vec x(d), y(d), gx(d), gy(d), xi(d), ula_y(d), diff(d);
    if (ou) {
      y = initial_point(p, InitSpec::from_pi(), cfg.seed, c, h);
    } else {
      y = mala_warm_start(p, h, burn, cfg.seed, c);
    }
    x = y;
    p.grad_into(x, gx);
    p.grad_into(y, gy);

    const std::size_t per_step = ou ? 2 * d : sub * d;
    NoiseStream noise(cfg.seed, stream_id(c, StreamRole::Main), per_step);
    Vec buf(per_step), eta(d), xi_eig(d);
    const double hf = h / static_cast<double>(sub);
    const double sf = std::sqrt(2.0 * hf);
    const double inv_sqrt_sub = 1.0 / std::sqrt(static_cast<double>(sub));
    for (std::uint64_t k = 0; k < cfg.n_steps; ++k) {
      const bool record = k >= burn;
      if (record) {
        diff = x - y;
        const double gi = diff.cwiseAbs().maxCoeff();
        r.gap_inf.add(gi * gi);
        r.gap_l2.add(diff.squaredNorm());
        r.acc_x.add(x, gx);
        r.acc_y.add(y, gy);
      }
      noise.draw(k, as_span(buf));
      if (ou) {
        xi = buf.head(d);
        ou->rotate_noise(xi, xi_eig);
        ou->to_eigen(y, eta);
        eta = ou->decay.cwiseProduct(eta) + ou->shared.cwiseProduct(xi_eig) +
              ou->resid.cwiseProduct(buf.tail(d));
        ula_y = y - h * gy + s * xi;
        ou->from_eigen(eta, y);
      } else {
        xi.setZero();
        ula_y = y - h * gy;
        for (std::size_t j = 0; j < sub; ++j) {
          const auto z = buf.segment(static_cast<Eigen::Index>(j * d), static_cast<Eigen::Index>(d));
          if (j > 0) p.grad_into(y, gy);
          y.noalias() -= hf * gy;
          y.noalias() += sf * z;
          xi += z;
        }
        xi *= inv_sqrt_sub;
        ula_y.noalias() += s * xi;
      }
      if (record) {
        const double e = (y - ula_y).cwiseAbs().maxCoeff();
        r.step_err.add(e * e);
      }
      x.noalias() -= h * gx;
      x.noalias() += s * xi;
      if (diverged(x)) throw_diverged(x, k + 1);
      if (diverged(y)) throw_diverged(y, k + 1);
      p.grad_into(x, gx);
      p.grad_into(y, gy);
    }
    results[c].emplace(std::move(r));
  });

  CoupledRun run;
  run.config = cfg;
  run.reference = ref;
  run.burn_in = burn;
  run.samples_per_chain = n;
  CoupledResult& total = *results[0];
  for (std::size_t c = 1; c < cfg.n_chains; ++c) {
    total.acc_x.merge(std::move(results[c]->acc_x));
    total.acc_y.merge(std::move(results[c]->acc_y));
    total.gap_inf.merge(results[c]->gap_inf);
    total.gap_l2.merge(results[c]->gap_l2);
    total.step_err.merge(results[c]->step_err);
  }
  run.gap_inf_sq = total.gap_inf.estimate();
  run.gap_l2_sq = total.gap_l2.estimate();
  run.step_error_sq = total.step_err.estimate();
  Vec se_unused, vse_unused;
  total.acc_x.finalize_moments(run.mean_x, se_unused, run.variance_x, vse_unused);
  total.acc_y.finalize_moments(run.mean_y, se_unused, run.variance_y, vse_unused);
  run.samples_x = total.acc_x.samples();
  run.samples_y = total.acc_y.samples();
  return run;
}

}  // namespace deloc
