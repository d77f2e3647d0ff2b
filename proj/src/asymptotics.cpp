#include "deloc/asymptotics.hpp"

#include <cmath>

#include "deloc/errors.hpp"

namespace deloc {

namespace {

struct ReferenceRun {
  ChainRun run;
  std::string label;
};

ReferenceRun reference_run(const Potential& p, std::uint64_t n_mc, std::uint64_t seed, const PiReference& ref,
                           const RunOptions& opts) {
  if (ref.n_chains == 0) throw InputError("need at least one chain");
  const std::uint64_t per_chain = n_mc / ref.n_chains;
  if (per_chain < 2) throw InputError("too few reference samples per chain");
  const auto gp = ref.kind == PiReference::Kind::Mala ? nullptr : gaussian_view(p);
  if (ref.kind == PiReference::Kind::ExactGaussian && !gp) {
    throw ConfigError("/reference", "exact_gaussian reference requires a Gaussian target");
  }
  StepConfig cfg;
  cfg.seed = seed;
  cfg.n_chains = ref.n_chains;
  cfg.threads = ref.threads;
  if (gp) {
    cfg.n_steps = per_chain;
    return {exact_gaussian_run(*gp, 0.0, cfg, opts), "exact_gaussian"};
  }
  cfg.h = ref.mala_h > 0.0 ? ref.mala_h : default_mala_step(p);
  const std::uint64_t burn = ref.burn_in > 0 ? ref.burn_in : default_burn_in(p.alpha(), cfg.h);
  cfg.burn_in = burn;
  cfg.n_steps = burn + per_chain;
  ChainRun run = mala_chain(p, cfg, {}, opts);
  if (run.acceptance_rate < 0.01) {
    throw Error("MALA reference acceptance rate " + std::to_string(run.acceptance_rate) + " is below 1%");
  }
  return {std::move(run), "mala"};
}

}  // namespace

FirstOrderBiasReport first_order_slope(const Potential& p, const Observable& f, std::uint64_t n_mc,
                                       std::uint64_t seed, const PiReference& ref) {
  if (f.min_dim() > p.dim()) throw InputError("observable uses coordinates beyond the target dimension");
  const Potential* pp = &p;
  RunOptions opts;
  opts.vector_functional = VectorFunctional{{"f", "grad_sq", "grad_sq_f", "lap_v", "lap_v_f"},
                                            [pp, &f](VecRef x, VecRef g, double* out) {
                                              const double fx = f(x);
                                              const double g2 = g.squaredNorm();
                                              const double lap = pp->laplacian(x);
                                              out[0] = fx;
                                              out[1] = g2;
                                              out[2] = g2 * fx;
                                              out[3] = lap;
                                              out[4] = lap * fx;
                                            }};
  const ReferenceRun rr = reference_run(p, n_mc, seed, ref, opts);
  const auto& fn = rr.run.functionals;
  const double lap_f = f.laplacian();
  // |grad log pi|^2 = |grad V|^2 and lap log pi = -lap V.
  const Estimate cov_a = covariance_estimate(fn[2], fn[0], fn[1]);
  const Estimate cov_b = covariance_estimate(fn[4], fn[0], fn[3]);
  FirstOrderBiasReport rep;
  rep.formula_a = {0.25 * (-2.0 * lap_f + cov_a.value), 0.25 * cov_a.se};
  rep.formula_b = {-0.25 * (lap_f - cov_b.value), 0.25 * cov_b.se};
  rep.mean_f = fn[0].estimate();
  rep.reference = rr.label;
  rep.acceptance_rate = rr.run.acceptance_rate;
  rep.n_samples = rr.run.total_samples();
  return rep;
}

EmpiricalSlope empirical_slope(const Potential& p, const Observable& f, const std::vector<double>& h_grid,
                               const StepConfig& cfg, std::uint64_t n_ref, const PiReference& ref) {
  if (h_grid.size() < 4) throw InputError("h grid needs at least 4 values");
  for (double h : h_grid) {
    if (!(h > 0.0) || h > 1.0 / p.beta() * (1.0 + 1e-12)) throw InputError("h grid must lie in (0, 1/beta]");
  }
  RunOptions opts;
  opts.functionals = {{"f", [&f](VecRef x, VecRef) { return f(x); }}};
  const ReferenceRun rr = reference_run(p, n_ref, cfg.seed ^ 0x5bd1e995ull, ref, opts);
  const Estimate pi_mean = rr.run.functionals[0].estimate();
  EmpiricalSlope out;
  std::vector<double> hs, biases, ses;
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    StepConfig c = cfg;
    c.h = h_grid[k];
    c.seed = cfg.seed + 1000003ull * (k + 1);
    const ChainRun run = run_chain(p, c, {}, opts);
    BiasPoint pt;
    pt.h = c.h;
    pt.pi_mean = pi_mean;
    pt.chain_mean = run.functionals[0].estimate();
    pt.bias = {pi_mean.value - pt.chain_mean.value, std::hypot(pi_mean.se, pt.chain_mean.se)};
    out.points.push_back(pt);
    hs.push_back(pt.h);
    biases.push_back(pt.bias.value);
    ses.push_back(std::max(pt.bias.se, 1e-300));
  }
  out.slope = fit_through_origin(hs, biases, ses);
  return out;
}

ScalingReport sqrt_k_scaling_check(const Potential& p, const std::vector<std::size_t>& k_grid, std::uint64_t n_mc,
                                   std::uint64_t seed, const PiReference& ref) {
  if (k_grid.empty()) throw InputError("K grid is empty");
  for (std::size_t k : k_grid) {
    if (k == 0 || k > p.dim()) throw InputError("K must lie in [1, d]");
  }
  const Potential* pp = &p;
  VectorFunctional vf;
  vf.names.push_back("lap_v");
  for (std::size_t k : k_grid) {
    vf.names.push_back("f_" + std::to_string(k));
    vf.names.push_back("lap_v_f_" + std::to_string(k));
  }
  vf.fn = [pp, &k_grid](VecRef x, VecRef, double* out) {
    const double lap = pp->laplacian(x);
    out[0] = lap;
    for (std::size_t idx = 0; idx < k_grid.size(); ++idx) {
      const double fk = x.head(static_cast<Eigen::Index>(k_grid[idx])).sum();
      out[1 + 2 * idx] = fk;
      out[2 + 2 * idx] = lap * fk;
    }
  };
  RunOptions opts;
  opts.vector_functional = std::move(vf);
  const ReferenceRun rr = reference_run(p, n_mc, seed, ref, opts);
  const auto& fn = rr.run.functionals;
  ScalingReport rep;
  rep.n_samples = rr.run.total_samples();
  rep.acceptance_rate = rr.run.acceptance_rate;
  std::vector<double> ks, mags;
  for (std::size_t idx = 0; idx < k_grid.size(); ++idx) {
    // lap f = 0, so slope = -(1/4) E[f_c lap log pi] = (1/4) Cov(f, lap V).
    const Estimate cov = covariance_estimate(fn[2 + 2 * idx], fn[1 + 2 * idx], fn[0]);
    ScalingRow row{k_grid[idx], {0.25 * cov.value, 0.25 * cov.se}};
    rep.rows.push_back(row);
    const double noise_floor = std::max(3.0 * row.slope.se, 1e-12);
    if (std::abs(row.slope.value) > noise_floor) rep.resolved = true;
    rep.c1_proxy = std::max(rep.c1_proxy, std::abs(row.slope.value) / std::sqrt(static_cast<double>(row.k)));
    ks.push_back(static_cast<double>(row.k));
    mags.push_back(std::abs(row.slope.value));
  }
  if (rep.resolved && k_grid.size() >= 2) {
    bool positive = true;
    for (double m : mags) positive = positive && m > 0.0;
    if (positive) {
      const LineFit fit = fit_loglog(ks, mags);
      rep.exponent = fit.slope;
      rep.exponent_se = fit.slope_stderr;
    } else {
      rep.resolved = false;
    }
  }
  return rep;
}

}  // namespace deloc
