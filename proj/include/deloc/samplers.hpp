#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deloc/potentials.hpp"
#include "deloc/stats.hpp"

namespace deloc {

struct StepConfig {
  double h = 0.0;
  /// Total iterations per chain, burn-in included.
  std::uint64_t n_steps = 0;
  /// Defaults to max(10 / (alpha h), 1e4).
  std::optional<std::uint64_t> burn_in;
  std::uint64_t seed = 0;
  std::size_t n_chains = 1;
  /// Keep every k-th post-burn-in state (0 keeps none).
  std::size_t store_every = 0;
  std::size_t threads = 1;
};

std::uint64_t default_burn_in(double alpha, double h);
std::uint64_t resolved_burn_in(const StepConfig& cfg, double alpha);
/// Throws InputError unless 0 < h <= 1/beta and burn_in < n_steps.
void validate_step_config(const StepConfig& cfg, const Potential& p);

/// Scalar functional of (x, grad V(x)) averaged along a run with batch means.
struct Functional {
  std::string name;
  std::function<double(VecRef x, VecRef grad)> fn;
};

/// Several outputs computed together, for functionals that share work.
struct VectorFunctional {
  std::vector<std::string> names;
  std::function<void(VecRef x, VecRef grad, double* out)> fn;
};

struct RunOptions {
  bool track_covariance = false;
  std::vector<Functional> functionals;
  /// Outputs are appended after `functionals` in ChainRun::functionals.
  std::optional<VectorFunctional> vector_functional;

  std::size_t n_outputs() const {
    return functionals.size() + (vector_functional ? vector_functional->names.size() : 0);
  }
};

/// Starting point: a fixed vector, or an exact draw from pi or pi_h (Gaussian
/// targets only). Empty `point` means the zero vector.
struct InitSpec {
  enum class Kind { Point, ExactPi, ExactPiH };
  Kind kind = Kind::Point;
  Vec point;

  static InitSpec at(Vec x) { return {Kind::Point, std::move(x)}; }
  static InitSpec from_pi() { return {Kind::ExactPi, {}}; }
  static InitSpec from_pi_h() { return {Kind::ExactPiH, {}}; }
};

struct ChainRun {
  StepConfig config;
  std::uint64_t burn_in = 0;
  std::uint64_t samples_per_chain = 0;
  Vec mean, mean_se;
  Vec variance, variance_se;
  /// Empty unless RunOptions::track_covariance.
  Mat covariance;
  /// One entry per RunOptions::functionals, pooled over chains.
  std::vector<BatchMeans> functionals;
  /// E|grad V|_inf^2 along the run, and the largest |grad V|_inf seen.
  Estimate grad_inf_sq;
  double max_grad_inf = 0.0;
  /// Thinned post-burn-in states, chains concatenated in order.
  Mat samples;
  Mat final_states;
  double acceptance_rate = 1.0;
  std::vector<std::string> warnings;

  std::uint64_t total_samples() const { return samples_per_chain * config.n_chains; }
};

/// x - h grad V(x) + sqrt(2h) noise. Throws DivergedError (with `iteration`)
/// when the result is non-finite or exceeds 1e10 in max norm.
Vec ula_step(const Potential& p, VecRef x, double h, VecRef noise, std::uint64_t iteration = 0);

constexpr double kDivergenceThreshold = 1e10;

ChainRun run_chain(const Potential& p, const StepConfig& cfg, const InitSpec& init = {},
                   const RunOptions& opts = {});

/// Metropolis-adjusted Langevin with ULA proposals. Adds a warning when the
/// acceptance rate falls below 1%.
ChainRun mala_chain(const Potential& p, const StepConfig& cfg, const InitSpec& init = {},
                    const RunOptions& opts = {});

/// (0.5 / beta) min(1, (64 / d)^{1/3}): keeps MALA acceptance near 0.6 on
/// lattice targets as d grows.
double default_mala_step(const Potential& p);

/// i.i.d. draws from pi (h_bias = 0) or from the ULA stationary law pi_h,
/// reported in the ChainRun format. cfg.n_steps - burn_in draws per chain;
/// burn_in defaults to 0 here.
ChainRun exact_gaussian_run(const GaussianPotential& p, double h_bias, const StepConfig& cfg,
                            const RunOptions& opts = {});

/// Exact sampler for N(m, A^{-1}) or for pi_h = N(m, (A - h/2 A^2)^{-1}) via a
/// sparse Cholesky factorization.
class GaussianSampler {
 public:
  explicit GaussianSampler(const GaussianPotential& p, double h_bias = 0.0);
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  /// Maps standard normals z to a draw.
  void transform(VecRef z, VecOut out) const;
  Mat sample(std::size_t n, std::uint64_t seed, std::uint32_t stream = 0) const;

 private:
  Vec mean_;
  bool diagonal_;
  Vec inv_sqrt_diag_;
  Eigen::SimplicialLLT<SpMat> llt_;
};

/// Precision of pi_h for a Gaussian target: A - (h/2) A^2.
SpMat biased_precision(const SpMat& a, double h);
/// Covariance of pi_h, Sigma (I - h/2 Sigma^{-1})^{-1}, via the eigenvalues of A.
Mat biased_covariance(const SpMat& a, double h);

struct Reference {
  enum class Kind { ExactGaussian, FineUla };
  Kind kind = Kind::FineUla;
  /// Fine steps per coarse step for FineUla (h_ref = h / substeps).
  std::size_t substeps = 50;

  static Reference exact_gaussian() { return {Kind::ExactGaussian, 1}; }
  static Reference fine_ula(std::size_t substeps = 50) { return {Kind::FineUla, substeps}; }
};

struct CoupledRun {
  StepConfig config;
  Reference reference;
  std::uint64_t burn_in = 0;
  std::uint64_t samples_per_chain = 0;
  /// E|X - Y|_inf^2 and E|X - Y|_2^2 under the synchronous coupling.
  Estimate gap_inf_sq;
  Estimate gap_l2_sq;
  /// E|Y' - (Y - h grad V(Y) + sqrt(2h) xi)|_inf^2: one-step error of ULA
  /// started on the reference chain.
  Estimate step_error_sq;
  /// Per-coordinate moments of the ULA chain (x) and the reference (y).
  Vec mean_x, mean_y, variance_x, variance_y;
  Mat samples_x, samples_y;
  std::vector<std::string> warnings;

  static double root(const Estimate& sq) { return std::sqrt(std::max(sq.value, 0.0)); }
  /// Delta-method standard error of sqrt(E[.]).
  static double root_se(const Estimate& sq);
  double gap_inf() const { return root(gap_inf_sq); }
  double gap_l2() const { return root(gap_l2_sq); }
};

/// Chain X runs ULA at step h; chain Y follows the reference dynamics, both
/// driven by the same Brownian increments. Exact-Gaussian references start at
/// an exact draw from pi; fine-ULA references start from a MALA warm start.
/// Both chains share the starting point.
CoupledRun coupled_bias_run(const Potential& p, const StepConfig& cfg, const Reference& ref);

}  // namespace deloc
