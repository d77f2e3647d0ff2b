#include "deloc/theory_bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "deloc/errors.hpp"
#include "deloc/rng.hpp"
#include "deloc/samplers.hpp"

namespace deloc {

namespace {

constexpr double kE2 = std::numbers::e * std::numbers::e;

double log2d(std::size_t d) { return std::log(2.0 * static_cast<double>(d)); }

}  // namespace

double BoundInputs::q() const { return std::exp(-h * alpha); }

double BoundInputs::grad_inf_sq_or_default() const {
  if (grad_inf_sq) return *grad_inf_sq;
  const double g = grad_inf_bound(alpha, beta, d);
  return g * g;
}

void BoundInputs::validate() const {
  if (!(alpha > 0.0) || !(beta >= alpha) || !std::isfinite(beta)) throw InputError("need 0 < alpha <= beta");
  if (!(h > 0.0) || h > 1.0 / beta * (1.0 + 1e-12)) throw InputError("need 0 < h <= 1/beta");
  if (d == 0) throw InputError("dimension must be positive");
  if (profile.dim() != d) throw InputError("sparsity profile dimension differs from d");
  if (grad_inf_sq && !(*grad_inf_sq >= 0.0)) throw InputError("grad_inf_sq must be >= 0");
}

std::size_t r_index(std::size_t i, double h, double beta, std::size_t d) {
  if (i == 0) throw InputError("r_index needs i >= 1");
  const double v = kE2 * static_cast<double>(i) * h * beta + 0.5 * std::log(static_cast<double>(d));
  return static_cast<std::size_t>(std::ceil(v));
}

double error_factor(const BoundInputs& in) {
  return in.h * in.h * std::sqrt(in.grad_inf_sq_or_default()) + 3.0 * std::pow(in.h, 1.5) * std::sqrt(log2d(in.d));
}

namespace {

double sqrt_s(const BoundInputs& in, std::size_t i) {
  return std::sqrt(static_cast<double>(in.profile.at(r_index(i, in.h, in.beta, in.d))));
}

BiasValue finish(const BoundInputs& in, std::size_t n, double weighted_sum, double ef) {
  BiasValue out;
  out.n = n;
  out.contraction = 2.0 * std::pow(in.q(), static_cast<double>(n)) * sqrt_s(in, n);
  out.feasible = out.contraction < 1.0;
  out.value = out.feasible ? 2.0 * in.beta * weighted_sum / (1.0 - out.contraction) * ef
                           : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace

BiasValue bias_bound(const BoundInputs& in, std::size_t n_steps) {
  in.validate();
  if (n_steps == 0) throw InputError("N must be >= 1");
  const double q = in.q();
  double sum = 0.0;
  double qi = 1.0;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    sum += qi * sqrt_s(in, i);
    qi *= q;
  }
  return finish(in, n_steps, sum, error_factor(in));
}

double grad_inf_bound(double alpha, double beta, std::size_t d) {
  if (!(alpha > 0.0)) throw InputError("alpha must be positive");
  if (d == 0) throw InputError("dimension must be positive");
  return 2.0 * beta / std::sqrt(alpha) * std::sqrt(log2d(d));
}

double one_step_error_bound(double h, double grad_inf_sq, std::size_t d) {
  return std::pow(h, 1.5) * std::sqrt(grad_inf_sq) + 3.0 * h * std::sqrt(log2d(d));
}

ProductBound product_bias_bound(double alpha, double beta, double h, std::size_t d) {
  if (!(alpha > 0.0) || !(beta >= alpha)) throw InputError("need 0 < alpha <= beta");
  if (!(h >= 0.0)) throw InputError("h must be >= 0");
  if (d == 0) throw InputError("dimension must be positive");
  if (h <= alpha / (beta * beta)) return {4.0 * beta / alpha * std::sqrt(h * log2d(d)), true};
  const double inner = 8.0 * beta * beta / (3.0 * alpha) * h * h + 8.0 * h;
  return {beta / alpha * std::sqrt(inner) * std::sqrt(log2d(d)), false};
}

double polynomial_branch(const BoundInputs& in, const PolynomialGrowth& g) {
  const double logs = 0.5 * std::log(static_cast<double>(in.d));
  const double base = 4.0 * kE2 * std::log(4.0 * std::sqrt(static_cast<double>(in.d))) * in.beta / in.alpha + logs + 2.0;
  const double e = g.n / 2.0 + 1.0;
  return 4.0 * std::sqrt(g.c) * std::pow(base, e) / (e * kE2 * in.h) * error_factor(in);
}

double dense_branch(const BoundInputs& in) {
  return 4.0 * in.beta * std::sqrt(static_cast<double>(in.d)) / (in.alpha * in.h) * error_factor(in);
}

PolynomialGrowth fit_growth(const BoundInputs& in) {
  PolynomialGrowth best{static_cast<double>(in.d), 0.0};
  double best_val = std::numeric_limits<double>::infinity();
  const auto& s = in.profile.values();
  for (int n = 1; n <= 8; ++n) {
    double c = 0.0;
    for (std::size_t k = 1; k <= s.size(); ++k) {
      c = std::max(c, static_cast<double>(s[k - 1]) / std::pow(static_cast<double>(k + 1), n));
    }
    // A saturated profile stays at s_{k_max}, which (k+1)^n only dominates more.
    const PolynomialGrowth g{c, static_cast<double>(n)};
    const double v = polynomial_branch(in, g);
    if (v < best_val) {
      best_val = v;
      best = g;
    }
  }
  return best;
}

BoundReport bias_bound_optimized(const BoundInputs& in) {
  in.validate();
  BoundReport rep;
  rep.inputs = in;
  const double hl = in.h * in.alpha;
  const double l4 = std::log(4.0 * std::sqrt(static_cast<double>(in.d)));
  rep.n_proof = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(l4 / hl)));
  rep.n_max = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(10.0 * l4 / hl)));
  if (in.n_cap) rep.n_max = std::max<std::size_t>(1, std::min(rep.n_max, *in.n_cap));
  rep.grad_inf_sq_used = in.grad_inf_sq_or_default();
  const double ef = error_factor(in);
  const double q = in.q();
  double sum = 0.0;
  double qi = 1.0;
  rep.best_value = std::numeric_limits<double>::infinity();
  rep.curve.reserve(rep.n_max);
  for (std::size_t n = 1; n <= rep.n_max; ++n) {
    sum += qi * sqrt_s(in, n);
    qi *= q;
    const BiasValue v = finish(in, n, sum, ef);
    rep.curve.push_back(v);
    if (n == rep.n_proof) rep.at_proof_n = v;
    if (v.feasible && v.value < rep.best_value) {
      rep.best_value = v.value;
      rep.best_n = n;
      rep.feasible = true;
    }
  }
  if (!rep.feasible) rep.best_value = std::numeric_limits<double>::quiet_NaN();
  rep.growth = in.growth ? *in.growth : fit_growth(in);
  rep.polynomial_branch = polynomial_branch(in, rep.growth);
  rep.dense_branch = dense_branch(in);
  return rep;
}

// ---------------------------------------------------------------- propagators

double linf_operator_norm(const Mat& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

PropagatorReport propagator_check(const Potential& p, const PropagatorOptions& opts) {
  const std::size_t d = p.dim();
  if (d > 512) throw InputError("propagator check uses dense products; need d <= 512");
  if (!(opts.h > 0.0) || opts.h > 1.0 / p.beta() * (1.0 + 1e-12)) throw InputError("need 0 < h <= 1/beta");
  if (opts.trials == 0) throw InputError("need at least one trial");
  const std::size_t per_trial = opts.max_n + 1;
  const std::size_t n_points = opts.trials * per_trial;

  Mat points;
  if (opts.random_points) {
    points.resize(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(d));
    NoiseStream noise(opts.seed, stream_id(0, StreamRole::Auxiliary), 0, d);
    Vec u(d);
    for (std::size_t k = 0; k < n_points; ++k) {
      noise.draw(k, {}, {u.data(), d});
      points.row(static_cast<Eigen::Index>(k)) = ((2.0 * u.array() - 1.0) * opts.random_radius).matrix().transpose();
    }
  } else {
    StepConfig cfg;
    cfg.h = opts.h;
    cfg.seed = opts.seed;
    cfg.store_every = std::max<std::size_t>(opts.thin, 1);
    const std::uint64_t burn = default_burn_in(p.alpha(), opts.h);
    cfg.burn_in = burn;
    cfg.n_steps = burn + n_points * cfg.store_every;
    points = mala_chain(p, cfg).samples;
  }

  const auto hop = hop_distances(p.graph());
  std::size_t diameter = 0;
  for (std::size_t v : hop) {
    if (v != std::numeric_limits<std::size_t>::max()) diameter = std::max(diameter, v);
  }
  const auto profile = sparsity_profile(p.graph(), std::max<std::size_t>(diameter + 1, 1));
  BoundInputs bi;
  bi.alpha = p.alpha();
  bi.beta = p.beta();
  bi.h = opts.h;
  bi.d = d;
  bi.profile = profile;
  const double q = bi.q();

  PropagatorReport rep;
  rep.trials = opts.trials;
  rep.max_n = opts.max_n;
  rep.identity_norm = linf_operator_norm(Mat::Identity(d, d));
  rep.rows.resize(opts.max_n);
  for (std::size_t n = 1; n <= opts.max_n; ++n) {
    auto& row = rep.rows[n - 1];
    row.n = n;
    const double s = std::sqrt(static_cast<double>(profile.at(r_index(n, opts.h, p.beta(), d))));
    row.bound_p = 2.0 * s * std::pow(q, static_cast<double>(n));
    row.bound_j = p.beta() * row.bound_p;
  }

  auto violate = [&rep](std::size_t trial, std::size_t n, const char* claim, double actual, double bound,
                        std::size_t r, std::size_t c) {
    if (!rep.witness) rep.witness = PropagatorWitness{trial, n, claim, actual, bound, r, c};
  };
  auto check_pattern = [&](const Mat& m, std::size_t n, std::size_t trial) {
    if (n >= diameter) return;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, j) != 0.0 && hop[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(j)] > n) {
          ++rep.sparsity_violations;
          violate(trial, n, "sparsity", std::abs(m(i, j)), 0.0, static_cast<std::size_t>(i),
                  static_cast<std::size_t>(j));
          return;
        }
      }
    }
  };

  for (std::size_t t = 0; t < opts.trials; ++t) {
    const Eigen::Index base = static_cast<Eigen::Index>(t * per_trial);
    const SpMat h0 = p.hessian(points.row(base).transpose());
    Mat prop = Mat::Identity(d, d);
    Mat hess_prod = Mat::Identity(d, d);
    for (std::size_t n = 1; n <= opts.max_n; ++n) {
      const SpMat hn = p.hessian(points.row(base + static_cast<Eigen::Index>(n)).transpose());
      prop -= opts.h * (hn * prop);
      hess_prod = hn * hess_prod;
      // Rescale to avoid overflow; the support is unchanged.
      const double scale = hess_prod.cwiseAbs().maxCoeff();
      if (scale > 0.0) hess_prod /= scale;
      check_pattern(hess_prod, n, t);
      check_pattern(prop, n, t);
      const Mat j = h0 * prop;
      auto& row = rep.rows[n - 1];
      const double np = linf_operator_norm(prop);
      const double nj = linf_operator_norm(j);
      row.max_p = std::max(row.max_p, np);
      row.max_j = std::max(row.max_j, nj);
      rep.max_ratio_p = std::max(rep.max_ratio_p, np / row.bound_p);
      rep.max_ratio_j = std::max(rep.max_ratio_j, nj / row.bound_j);
      if (np > row.bound_p) {
        ++rep.p_violations;
        violate(t, n, "propagator", np, row.bound_p, 0, 0);
      }
      if (nj > row.bound_j) {
        ++rep.j_violations;
        violate(t, n, "hessian_propagator", nj, row.bound_j, 0, 0);
      }
      ++rep.checks;
    }
  }
  return rep;
}

}  // namespace deloc
