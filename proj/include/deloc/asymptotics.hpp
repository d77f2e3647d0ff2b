#pragma once

#include <string>
#include <vector>

#include "deloc/observables.hpp"
#include "deloc/potentials.hpp"
#include "deloc/samplers.hpp"
#include "deloc/stats.hpp"

namespace deloc {

/// Where expectations under pi come from.
struct PiReference {
  enum class Kind { Auto, ExactGaussian, Mala };
  Kind kind = Kind::Auto;  // exact for Gaussian targets, MALA otherwise
  /// MALA step; 0 picks default_mala_step.
  double mala_h = 0.0;
  std::uint64_t burn_in = 0;  // 0 picks the sampler default
  std::size_t n_chains = 1;
  std::size_t threads = 1;
};

struct FirstOrderBiasReport {
  /// (1/4) E[-2 lap f + |grad log pi|^2 f_c]
  Estimate formula_a;
  /// -(1/4) E[lap f + f_c lap log pi]
  Estimate formula_b;
  Estimate mean_f;
  std::string reference;
  double acceptance_rate = 1.0;
  std::uint64_t n_samples = 0;
};

/// Monte Carlo estimates of the first-order coefficient s in
/// E_pi f - E_{pi_h} f = s h + o(h), with f centered by its estimated mean.
/// Throws Error when the MALA acceptance rate is below 1%.
FirstOrderBiasReport first_order_slope(const Potential& p, const Observable& f, std::uint64_t n_mc,
                                       std::uint64_t seed, const PiReference& ref = {});

struct BiasPoint {
  double h = 0.0;
  Estimate pi_mean;
  Estimate chain_mean;
  Estimate bias;
};

struct EmpiricalSlope {
  Estimate slope;
  std::vector<BiasPoint> points;
};

/// Measures bias(h) = E_pi f - E_{pi_h} f on each h by a long ULA run (cfg.h is
/// replaced) and fits bias = s h through the origin by weighted least squares.
/// E_pi f comes from n_ref reference draws.
EmpiricalSlope empirical_slope(const Potential& p, const Observable& f, const std::vector<double>& h_grid,
                               const StepConfig& cfg, std::uint64_t n_ref, const PiReference& ref = {});

struct ScalingRow {
  std::size_t k = 0;
  Estimate slope;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  bool resolved = false;
  double exponent = 0.0;
  double exponent_se = 0.0;
  /// max_K |slope_K| / sqrt(K)
  double c1_proxy = 0.0;
  std::uint64_t n_samples = 0;
  double acceptance_rate = 1.0;
};

/// First-order slope of f_K = x_0 + ... + x_{K-1} for every K from a single
/// reference run (formula B: slope = (1/4) Cov(f_K, lap V)), and a log-log
/// fit of |slope| against K. Unresolved when no slope clears 3 stderr.
ScalingReport sqrt_k_scaling_check(const Potential& p, const std::vector<std::size_t>& k_grid, std::uint64_t n_mc,
                                   std::uint64_t seed, const PiReference& ref = {});

}  // namespace deloc
