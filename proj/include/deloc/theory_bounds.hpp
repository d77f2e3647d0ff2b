#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deloc/graph.hpp"
#include "deloc/potentials.hpp"

namespace deloc {

/// Polynomial growth model s_k <= C (k+1)^n.
struct PolynomialGrowth {
  double c = 1.0;
  double n = 0.0;
};

struct BoundInputs {
  double alpha = 1.0;
  double beta = 1.0;
  double h = 0.0;
  std::size_t d = 1;
  SparsityProfile profile = constant_profile(1, 1);
  /// E_pi |grad V|_inf^2; defaults to grad_inf_bound(alpha, beta, d)^2.
  std::optional<double> grad_inf_sq;
  /// Growth model for the polynomial branch; fitted from the profile if absent.
  std::optional<PolynomialGrowth> growth;
  /// Caps the optimizer's search range below the default N_max.
  std::optional<std::size_t> n_cap;

  double q() const;
  double grad_inf_sq_or_default() const;
  /// Throws InputError unless 0 < h <= 1/beta, 0 < alpha <= beta, d >= 1 and
  /// the profile dimension matches d.
  void validate() const;
};

/// ceil(e^2 i h beta + log sqrt(d)).
std::size_t r_index(std::size_t i, double h, double beta, std::size_t d);

/// h^2 sqrt(E|grad V|_inf^2) + 3 h^{3/2} sqrt(log 2d).
double error_factor(const BoundInputs& in);

struct BiasValue {
  std::size_t n = 0;
  /// 2 q^N sqrt(s_{r_N}); feasible iff < 1.
  double contraction = 0.0;
  bool feasible = false;
  /// Bound value; NaN when infeasible.
  double value = 0.0;
};

BiasValue bias_bound(const BoundInputs& in, std::size_t n_steps);

struct BoundReport {
  BoundInputs inputs;
  std::size_t n_max = 0;
  /// ceil(log(4 sqrt d) / (h alpha)).
  std::size_t n_proof = 0;
  bool feasible = false;
  std::size_t best_n = 0;
  double best_value = 0.0;
  BiasValue at_proof_n;
  /// Closed-form branches (proof-derived, not optimized constants).
  PolynomialGrowth growth;
  double polynomial_branch = 0.0;
  double dense_branch = 0.0;
  double grad_inf_sq_used = 0.0;
  std::vector<BiasValue> curve;
};

/// Minimizes bias_bound over N in [1, ceil(10 log(4 sqrt d) / (h alpha))].
BoundReport bias_bound_optimized(const BoundInputs& in);

/// Smallest C in s_k <= C (k+1)^n over the profile for each n in {1,...,8};
/// returns the pair minimizing the polynomial branch.
PolynomialGrowth fit_growth(const BoundInputs& in);
double polynomial_branch(const BoundInputs& in, const PolynomialGrowth& g);
double dense_branch(const BoundInputs& in);

/// 2 (beta / sqrt(alpha)) sqrt(log 2d): bound on sqrt(E_pi |grad V|_inf^2).
double grad_inf_bound(double alpha, double beta, std::size_t d);

/// h^{3/2} sqrt(E|grad V|_inf^2) + 3 h sqrt(log 2d): one-step error bound.
double one_step_error_bound(double h, double grad_inf_sq, std::size_t d);

struct ProductBound {
  double value = 0.0;
  /// False when h > alpha / beta^2 and the unsimplified form was used.
  bool simplified = true;
};

/// (4 beta / alpha) sqrt(h log 2d) for h <= alpha / beta^2; otherwise the
/// looser (beta/alpha) sqrt((8 beta^2 / (3 alpha)) h^2 + 8h) sqrt(log 2d).
ProductBound product_bias_bound(double alpha, double beta, double h, std::size_t d);

struct PropagatorOptions {
  double h = 0.0;
  std::size_t max_n = 200;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  /// Take points from a MALA run at step h (default) or uniformly from
  /// [-random_radius, random_radius]^d.
  bool random_points = false;
  double random_radius = 5.0;
  /// MALA thinning between consecutive points.
  std::size_t thin = 5;
};

struct PropagatorWitness {
  std::size_t trial = 0;
  std::size_t n = 0;
  std::string claim;
  double actual = 0.0;
  double bound = 0.0;
  std::size_t row = 0, col = 0;
};

struct PropagatorRow {
  std::size_t n = 0;
  double max_p = 0.0, bound_p = 0.0;
  double max_j = 0.0, bound_j = 0.0;
};

struct PropagatorReport {
  std::size_t trials = 0;
  std::size_t max_n = 0;
  std::size_t checks = 0;
  std::size_t sparsity_violations = 0;
  std::size_t p_violations = 0;
  std::size_t j_violations = 0;
  /// Largest actual / bound over all (trial, n).
  double max_ratio_p = 0.0;
  double max_ratio_j = 0.0;
  double identity_norm = 0.0;  // |P_0|_inf
  std::optional<PropagatorWitness> witness;
  std::vector<PropagatorRow> rows;

  bool ok() const { return sparsity_violations == 0 && p_violations == 0 && j_violations == 0; }
};

/// Verifies, for n = 1..max_n along each trial's point sequence x_0, x_1, ...:
/// the product of n Hessians is supported on {(i,j) : j in N_n(i)},
/// |P_n|_inf <= 2 sqrt(s_{r_n}) q^n with P_n = prod_k (I - h Hess V(x_k)),
/// and |Hess V(x_0) P_n|_inf <= 2 beta sqrt(s_{r_n}) q^n.
PropagatorReport propagator_check(const Potential& p, const PropagatorOptions& opts);

/// Max absolute row sum.
double linf_operator_norm(const Mat& m);

}  // namespace deloc
