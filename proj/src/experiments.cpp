#include "deloc/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "deloc/asymptotics.hpp"
#include "deloc/config.hpp"
#include "deloc/errors.hpp"
#include "deloc/metrics.hpp"
#include "deloc/parallel.hpp"
#include "deloc/theory_bounds.hpp"

namespace deloc {

using nlohmann::json;

// ---------------------------------------------------------------- table

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double to_double(const Table::Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  const auto& s = std::get<std::string>(c);
  if (s == "nan" || s.empty()) return kNaN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  return end == s.c_str() ? kNaN : v;
}

}  // namespace

std::string format_cell(const Table::Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return quote_if_needed(std::get<std::string>(c));
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw InputError("row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

void Table::append(const Table& other) {
  if (other.columns_ != columns_) throw InputError("cannot append tables with different columns");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw InputError("no column '" + name + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<double> Table::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& r : rows_) out.push_back(to_double(r[c]));
  return out;
}

std::vector<std::string> Table::strings(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<std::string> out;
  for (const auto& r : rows_) {
    out.push_back(std::holds_alternative<std::string>(r[c]) ? std::get<std::string>(r[c]) : format_cell(r[c]));
  }
  return out;
}

Table Table::where(const std::string& name, const std::string& value) const {
  const std::size_t c = column(name);
  Table out(columns_);
  for (const auto& r : rows_) {
    const std::string v = std::holds_alternative<std::string>(r[c]) ? std::get<std::string>(r[c]) : format_cell(r[c]);
    if (v == value) out.rows_.push_back(r);
  }
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + quote_if_needed(columns_[i]);
  out += "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_cell(r[i]);
    out += "\n";
  }
  return out;
}

Table Table::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV");
  Table t(split_csv_line(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    std::vector<Cell> row(cells.begin(), cells.end());
    t.add(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------- helpers

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed for one sweep point, a function of the point's coordinates only.
std::uint64_t point_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t a, double b = 0.0) {
  return splitmix(splitmix(splitmix(seed ^ splitmix(tag)) ^ a) ^ std::bit_cast<std::uint64_t>(b));
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json fit_json(const LineFit& f) {
  return {{"slope", f.slope}, {"slope_se", f.slope_stderr}, {"intercept", f.intercept}, {"r2", f.r2}};
}

json fit_if_possible(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i]) && x[i] > 0.0 && y[i] > 0.0) {
      fx.push_back(x[i]);
      fy.push_back(y[i]);
    }
  }
  if (fx.size() < 2) return nullptr;
  return fit_json(fit_loglog(fx, fy));
}

struct Common {
  const json* config;
  JsonReader root;
  ExperimentHeader header;
  std::size_t threads;
};

Common open(const json& config, const std::string& kind, const RunContext& ctx) {
  JsonReader root(config, "");
  ExperimentHeader header = parse_header(root, kind);
  if (ctx.seed) header.seed = *ctx.seed;
  const std::size_t threads = resolve_threads(ctx.threads ? *ctx.threads : header.threads);
  return {&config, std::move(root), header, threads};
}

std::vector<std::size_t> sweep_dims(const JsonReader& sweep, const JsonReader& root) {
  if (sweep.has("d")) {
    std::vector<std::size_t> out;
    for (auto v : sweep.integers("d")) {
      if (v == 0) throw ConfigError(sweep.at("d"), "dimensions must be positive");
      out.push_back(v);
    }
    if (out.empty()) throw ConfigError(sweep.at("d"), "sweep list is empty");
    return out;
  }
  const JsonReader pot = root.child("potential");
  if (!pot.has("d")) throw ConfigError("/potential/d", "required field is missing (or give /sweep/d)");
  const json& d = pot.raw("d");
  if (!d.is_number_integer() || d.get<std::int64_t>() <= 0) throw ConfigError("/potential/d", "expected a positive integer");
  return {static_cast<std::size_t>(d.get<std::int64_t>())};
}

std::vector<double> sweep_steps(const JsonReader& sweep, const StepConfig& base) {
  if (sweep.has("h")) {
    auto hs = sweep.numbers("h");
    if (hs.empty()) throw ConfigError(sweep.at("h"), "sweep list is empty");
    for (std::size_t i = 0; i < hs.size(); ++i) {
      if (!(hs[i] > 0.0)) throw ConfigError(sweep.at("h") + "/" + std::to_string(i), "step size must be positive");
    }
    return hs;
  }
  if (!(base.h > 0.0)) throw ConfigError("/sampler/h", "required field is missing (or give /sweep/h)");
  return {base.h};
}

// Optional per-dimension iteration counts, parallel to /sweep/d.
std::vector<std::uint64_t> sweep_n_steps(const JsonReader& sweep, std::size_t n_dims, std::uint64_t fallback) {
  if (!sweep.has("n_steps")) return std::vector<std::uint64_t>(n_dims, fallback);
  auto v = sweep.integers("n_steps");
  if (v.size() != n_dims) throw ConfigError(sweep.at("n_steps"), "must have one entry per value of /sweep/d");
  return v;
}

void require_steps(const StepConfig& cfg, const std::string& pointer) {
  if (cfg.n_steps == 0) throw ConfigError(pointer, "n_steps is required");
}

// Wraps InputError raised by module preconditions as a config error at `pointer`.
template <typename Fn>
auto checked(const std::string& pointer, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw ConfigError(pointer, e.what());
  }
}

std::size_t required_k(std::size_t d, double h, double alpha, double beta) {
  const double l4 = std::log(4.0 * std::sqrt(static_cast<double>(d)));
  const auto n_max = static_cast<std::size_t>(std::ceil(10.0 * l4 / (h * alpha)));
  return std::clamp<std::size_t>(r_index(std::max<std::size_t>(n_max, 1), h, beta, d), 1, std::max<std::size_t>(d, 1));
}

SparsityProfile profile_for(const Potential& p, double h) {
  return sparsity_profile(p.graph(), required_k(p.dim(), h, p.alpha(), p.beta()));
}

bool is_product_measure(const Potential& p) { return p.graph().edges().empty(); }

// ---------------------------------------------------------------- run-chain

ExperimentResult cmd_run_chain(const json& config, const RunContext& ctx) {
  Common c = open(config, "run-chain", ctx);
  const JsonReader sampler = c.root.child("sampler");
  StepConfig base = parse_step_config(sampler);
  const std::string method = sampler.string("method", "ula");
  if (method != "ula" && method != "mala" && method != "exact_pi" && method != "exact_pi_h") {
    throw ConfigError("/sampler/method", "unknown method '" + method + "'");
  }
  sampler.finish();
  require_steps(base, "/sampler/n_steps");
  const JsonReader sweep = c.root.child_or_empty("sweep");
  const auto hs = sweep_steps(sweep, base);
  sweep.finish();
  const PotentialPtr p = build_potential(c.root.raw("potential"), "/potential");
  const auto gp = gaussian_view(*p);
  if ((method == "exact_pi" || method == "exact_pi_h") && !gp) {
    throw ConfigError("/sampler/method", "exact sampling requires a Gaussian target");
  }

  InitSpec init;
  if (c.root.has("init")) {
    const json& v = c.root.raw("init");
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "from_pi") {
        init = InitSpec::from_pi();
      } else if (s == "from_pi_h") {
        init = InitSpec::from_pi_h();
      } else if (s != "zero") {
        throw ConfigError("/init", "expected zero, from_pi, from_pi_h or a point");
      }
      if (init.kind != InitSpec::Kind::Point && !gp) throw ConfigError("/init", "exact initialization requires a Gaussian target");
    } else {
      const auto pt = c.root.numbers("init");
      if (pt.size() != p->dim()) throw ConfigError("/init", "initial point must have d entries");
      init = InitSpec::at(Eigen::Map<const Vec>(pt.data(), static_cast<Eigen::Index>(pt.size())));
    }
  }
  std::vector<Observable> observables;
  if (c.root.has("observables")) {
    const json& arr = c.root.raw("observables");
    if (!arr.is_array()) throw ConfigError("/observables", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      observables.push_back(parse_observable(arr[i], "/observables/" + std::to_string(i)));
      if (observables.back().min_dim() > p->dim()) {
        throw ConfigError("/observables/" + std::to_string(i), "observable uses coordinates beyond d");
      }
    }
  }
  const bool track_cov = c.root.boolean("track_covariance", p->dim() <= 64);
  const bool save = c.root.boolean("save_samples", false);
  c.root.finish();

  RunOptions opts;
  opts.track_covariance = track_cov;
  for (const auto& f : observables) opts.functionals.push_back({f.name(), [&f](VecRef x, VecRef) { return f(x); }});

  std::vector<ChainRun> runs(hs.size());
  const bool outer = hs.size() > 1;
  parallel_for(hs.size(), outer ? c.threads : 1, [&](std::size_t k) {
    StepConfig cfg = base;
    cfg.h = hs[k];
    cfg.seed = point_seed(c.header.seed, 1, p->dim(), hs[k]);
    cfg.threads = outer ? 1 : c.threads;
    checked("/sampler", [&] { validate_step_config(cfg, *p); return 0; });
    if (method == "ula") {
      runs[k] = run_chain(*p, cfg, init, opts);
    } else if (method == "mala") {
      runs[k] = mala_chain(*p, cfg, init, opts);
    } else {
      if (!cfg.burn_in) cfg.burn_in = 0;
      runs[k] = exact_gaussian_run(*gp, method == "exact_pi_h" ? cfg.h : 0.0, cfg, opts);
    }
  });

  ExperimentResult res;
  res.table = Table({"h", "coord", "mean", "mean_se", "variance", "variance_se", "variance_pi_h", "variance_pi"});
  json points = json::array();
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const ChainRun& r = runs[k];
    Mat cov_h, cov_pi;
    if (gp && p->dim() <= 2048) {
      cov_h = biased_covariance(gp->precision(), hs[k]);
      cov_pi = biased_covariance(gp->precision(), 0.0);
    }
    for (std::size_t i = 0; i < p->dim(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      res.table.add({hs[k], static_cast<std::int64_t>(i), r.mean(ii), r.mean_se(ii), r.variance(ii), r.variance_se(ii),
                     cov_h.size() ? cov_h(ii, ii) : kNaN, cov_pi.size() ? cov_pi(ii, ii) : kNaN});
    }
    json pt = {{"h", hs[k]},
               {"method", method},
               {"n_samples", r.total_samples()},
               {"burn_in", r.burn_in},
               {"mean", vec_json(r.mean)},
               {"mean_se", vec_json(r.mean_se)},
               {"variance", vec_json(r.variance)},
               {"variance_se", vec_json(r.variance_se)},
               {"grad_inf_sq", estimate_json(r.grad_inf_sq)},
               {"max_grad_inf", r.max_grad_inf},
               {"acceptance_rate", r.acceptance_rate},
               {"warnings", r.warnings}};
    if (cov_h.size() && r.covariance.size()) {
      pt["covariance_rel_error"] = (r.covariance - cov_h).norm() / cov_h.norm();
      pt["variance_pi_h_exact"] = vec_json(cov_h.diagonal());
    }
    json obs = json::array();
    for (std::size_t j = 0; j < observables.size(); ++j) {
      obs.push_back({{"name", observables[j].name()}, {"value", r.functionals[j].mean()}, {"se", r.functionals[j].se()}});
    }
    pt["observables"] = std::move(obs);
    points.push_back(std::move(pt));
    if (save && ctx.write_files) {
      if (r.samples.rows() < 2) throw ConfigError("/save_samples", "needs /sampler/store_every > 0 and enough steps");
      std::filesystem::create_directories(ctx.out_dir);
      write_samples(ctx.out_dir / ("samples_" + std::to_string(k) + ".bin"),
                    EmpiricalSamples(r.samples, method + " h=" + format_cell(hs[k])));
    }
  }
  res.summary = {{"family", p->family()}, {"d", p->dim()}, {"alpha", p->alpha()}, {"beta", p->beta()}, {"points", points}};
  return res;
}

// ------------------------------------------------- coupling-estimate / bias-scan

struct ScanPoint {
  std::size_t d = 0;
  double h = 0.0;
  PotentialPtr p;
  CoupledRun run;
  std::optional<MarginalLowerBound> lower;
  std::optional<GaussianUpperBound> formula;
  std::optional<BoundReport> bound;
  std::optional<ProductBound> product;
  double step_bound = 0.0;
};

ExperimentResult cmd_coupling(const json& config, const RunContext& ctx, const std::string& kind) {
  const bool scan = kind == "bias-scan";
  Common c = open(config, kind, ctx);
  const JsonReader sampler = c.root.child("sampler");
  const StepConfig base = parse_step_config(sampler);
  sampler.finish();
  require_steps(base, "/sampler/n_steps");
  const JsonReader sweep = c.root.child_or_empty("sweep");
  const auto dims = sweep_dims(sweep, c.root);
  const auto hs = sweep_steps(sweep, base);
  const auto steps = sweep_n_steps(sweep, dims.size(), base.n_steps);
  sweep.finish();
  const json& pot_spec = c.root.raw("potential");

  std::optional<Reference> ref;
  if (c.root.has("reference")) {
    const JsonReader r = c.root.child("reference");
    ref = parse_reference(r);
    r.finish();
  }
  std::size_t formula_draws = 0;
  if (c.root.has("gaussian_formula")) {
    const JsonReader g = c.root.child("gaussian_formula");
    formula_draws = g.integer("n_mc", 100000);
    g.finish();
  }
  std::optional<double> grad_inf_sq;
  if (scan && c.root.has("bounds")) {
    const JsonReader b = c.root.child("bounds");
    if (b.has("grad_inf_sq")) grad_inf_sq = b.number("grad_inf_sq");
    b.finish();
  }
  c.root.finish();

  std::vector<ScanPoint> pts;
  std::vector<std::uint64_t> pt_steps;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    PotentialPtr p = build_potential(pot_spec, "/potential", dims[i]);
    for (double h : hs) {
      ScanPoint sp;
      sp.d = dims[i];
      sp.h = h;
      sp.p = p;
      pts.push_back(std::move(sp));
      pt_steps.push_back(steps[i]);
    }
  }
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& sp = pts[k];
    if (sp.h > 1.0 / sp.p->beta() * (1.0 + 1e-12)) {
      throw ConfigError("/sweep/h", "h = " + format_cell(sp.h) + " exceeds 1/beta = " + format_cell(1.0 / sp.p->beta()));
    }
    if (ref && ref->kind == Reference::Kind::ExactGaussian && !gaussian_view(*sp.p)) {
      throw ConfigError("/reference/kind", "exact_gaussian reference requires a Gaussian target");
    }
    if (resolved_burn_in(base, sp.p->alpha()) >= pt_steps[k]) {
      throw ConfigError("/sampler/n_steps", "no steps remain after burn-in");
    }
  }

  const bool outer = pts.size() > 1;
  parallel_for(pts.size(), outer ? c.threads : 1, [&](std::size_t k) {
    ScanPoint& sp = pts[k];
    const Potential& p = *sp.p;
    const auto gp = gaussian_view(p);
    StepConfig cfg = base;
    cfg.h = sp.h;
    cfg.n_steps = pt_steps[k];
    cfg.seed = point_seed(c.header.seed, 2, sp.d, sp.h);
    cfg.threads = outer ? 1 : c.threads;
    const Reference r = ref ? *ref : (gp ? Reference::exact_gaussian() : Reference::fine_ula());
    sp.run = coupled_bias_run(p, cfg, r);
    if (sp.run.samples_x.rows() >= 2) {
      sp.lower = w2_linf_lower(EmpiricalSamples(sp.run.samples_x), EmpiricalSamples(sp.run.samples_y));
    }
    if (gp && formula_draws >= 2) sp.formula = w2_linf_upper_gaussian(*gp, sp.h, formula_draws, cfg.seed ^ 0xF0F0ull);
    const double g_bound = grad_inf_bound(p.alpha(), p.beta(), p.dim());
    sp.step_bound = one_step_error_bound(sp.h, g_bound * g_bound, p.dim());
    if (scan) {
      BoundInputs in;
      in.alpha = p.alpha();
      in.beta = p.beta();
      in.h = sp.h;
      in.d = p.dim();
      in.profile = profile_for(p, sp.h);
      in.grad_inf_sq = grad_inf_sq;
      sp.bound = bias_bound_optimized(in);
      sp.bound->curve.clear();
      if (is_product_measure(p)) sp.product = product_bias_bound(p.alpha(), p.beta(), sp.h, p.dim());
    }
  });

  std::vector<std::string> cols = {"d",           "h",           "alpha",          "beta",          "n_samples",
                                   "reference",   "lower_w2",    "lower_w2_se",    "lower_w2_coord", "lower_w1",
                                   "upper_linf",  "upper_linf_se", "gap_l2",       "gap_l2_se",     "step_error",
                                   "step_error_se", "step_error_bound", "formula_upper", "formula_upper_se"};
  if (scan) {
    for (const char* s : {"bound_feasible", "bound_value", "bound_best_n", "bound_n_proof", "bound_at_proof_n",
                          "polynomial_branch", "dense_branch", "product_bound", "dominates"}) {
      cols.push_back(s);
    }
  }
  ExperimentResult res;
  res.table = Table(cols);
  json warnings = json::array();
  bool all_dominate = true;
  std::size_t feasible_count = 0;
  for (const auto& sp : pts) {
    const CoupledRun& r = sp.run;
    const double upper = r.gap_inf();
    std::vector<Table::Cell> row = {
        static_cast<std::int64_t>(sp.d),
        sp.h,
        sp.p->alpha(),
        sp.p->beta(),
        static_cast<std::int64_t>(r.samples_per_chain * r.config.n_chains),
        std::string(r.reference.kind == Reference::Kind::ExactGaussian
                        ? "exact_gaussian"
                        : "fine_ula/" + std::to_string(r.reference.substeps)),
        sp.lower ? sp.lower->w2 : kNaN,
        sp.lower ? sp.lower->w2_se : kNaN,
        sp.lower ? static_cast<std::int64_t>(sp.lower->w2_coord) : std::int64_t{-1},
        sp.lower ? sp.lower->w1 : kNaN,
        upper,
        CoupledRun::root_se(r.gap_inf_sq),
        r.gap_l2(),
        CoupledRun::root_se(r.gap_l2_sq),
        CoupledRun::root(r.step_error_sq),
        CoupledRun::root_se(r.step_error_sq),
        sp.step_bound,
        sp.formula ? sp.formula->value : kNaN,
        sp.formula ? sp.formula->se : kNaN};
    if (scan) {
      const BoundReport& b = *sp.bound;
      const bool dom = !b.feasible || b.best_value >= upper;
      if (b.feasible) ++feasible_count;
      all_dominate = all_dominate && dom;
      row.insert(row.end(), {static_cast<std::int64_t>(b.feasible), b.best_value, static_cast<std::int64_t>(b.best_n),
                             static_cast<std::int64_t>(b.n_proof), b.at_proof_n.value, b.polynomial_branch,
                             b.dense_branch, sp.product ? sp.product->value : kNaN,
                             static_cast<std::int64_t>(b.feasible ? dom : -1)});
    }
    res.table.add(std::move(row));
    for (const auto& w : r.warnings) warnings.push_back("d=" + std::to_string(sp.d) + " h=" + format_cell(sp.h) + ": " + w);
  }

  json fits = json::array();
  for (double h : hs) {
    const Table sub = res.table.where("h", format_cell(h));
    const auto ds = sub.numbers("d");
    json f = {{"h", h}};
    for (const char* q : {"lower_w2", "upper_linf", "gap_l2"}) f[q] = fit_if_possible(ds, sub.numbers(q));
    if (scan) f["bound_value"] = fit_if_possible(ds, sub.numbers("bound_value"));
    fits.push_back(std::move(f));
  }
  res.summary = {{"family", pts.front().p->family()}, {"fits_vs_d", fits}, {"warnings", warnings}};
  if (scan) {
    res.summary["bound_dominates"] = all_dominate;
    res.summary["feasible_points"] = feasible_count;
    res.summary["bound_constants"] = "proof-derived, not optimized";
  }
  if (hs.size() > 1) {
    json by_d = json::array();
    for (std::size_t d : dims) {
      const Table sub = res.table.where("d", std::to_string(d));
      by_d.push_back({{"d", d},
                      {"upper_linf", fit_if_possible(sub.numbers("h"), sub.numbers("upper_linf"))},
                      {"formula_upper", fit_if_possible(sub.numbers("h"), sub.numbers("formula_upper"))}});
    }
    res.summary["fits_vs_h"] = by_d;
  }
  return res;
}

// ---------------------------------------------------------------- negative-example

ExperimentResult cmd_negative_example(const json& config, const RunContext& ctx) {
  Common c = open(config, "negative-example", ctx);
  const JsonReader sampler = c.root.child("sampler");
  const StepConfig base = parse_step_config(sampler);
  sampler.finish();
  require_steps(base, "/sampler/n_steps");
  if (!(base.h > 0.0)) throw ConfigError("/sampler/h", "required field is missing");
  StepConfig one_d = base;
  if (c.root.has("one_d")) {
    const JsonReader r = c.root.child("one_d");
    one_d.n_steps = r.integer("n_steps", base.n_steps);
    if (r.has("burn_in")) one_d.burn_in = r.integer("burn_in");
    one_d.n_chains = r.integer("n_chains", base.n_chains);
    if (one_d.n_chains == 0) throw ConfigError("/one_d/n_chains", "need at least one chain");
    r.finish();
  }
  const JsonReader sweep = c.root.child_or_empty("sweep");
  const auto dims = sweep_dims(sweep, c.root);
  const auto steps = sweep_n_steps(sweep, dims.size(), base.n_steps);
  sweep.finish();
  const json& pot_spec = c.root.raw("potential");
  {
    const JsonReader pr(pot_spec, "/potential");
    if (pr.string("family") != "rotated_mixture") throw ConfigError("/potential/family", "expected rotated_mixture");
  }
  c.root.finish();

  std::vector<PotentialPtr> pots;
  for (std::size_t d : dims) pots.push_back(build_potential(pot_spec, "/potential", d));
  const PotentialPtr p1 = build_potential(pot_spec, "/potential", 1);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] == 1) continue;  // served by the one-dimensional run
    StepConfig cfg = base;
    cfg.n_steps = steps[i];
    checked("/sampler", [&] { validate_step_config(cfg, *pots[i]); return 0; });
  }
  checked("/one_d", [&] { validate_step_config(one_d, *p1); return 0; });

  // Index dims.size() is the one-dimensional reference run.
  std::vector<ChainRun> runs(dims.size() + 1);
  std::vector<std::size_t> jobs;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] != 1) jobs.push_back(i);
  }
  jobs.push_back(dims.size());
  const bool outer = jobs.size() > 1;
  parallel_for(jobs.size(), outer ? c.threads : 1, [&](std::size_t j) {
    const std::size_t i = jobs[j];
    const bool ref = i == dims.size();
    StepConfig cfg = ref ? one_d : base;
    if (!ref) cfg.n_steps = steps[i];
    cfg.seed = point_seed(c.header.seed, 3, ref ? 1 : dims[i]);
    cfg.threads = outer ? 1 : c.threads;
    runs[i] = run_chain(ref ? *p1 : *pots[i], cfg);
  });
  const ChainRun& r1 = runs.back();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] == 1) runs[i] = r1;  // same pipeline, so the d = 1 ratio is exactly 1
  }
  const auto& rm = dynamic_cast<const RotatedMixturePotential&>(*p1);
  const double pi_mean = rm.stats().mean;  // 0 for a centred mixture
  const Estimate delta{r1.mean(0) - pi_mean, r1.mean_se(0)};
  const bool inconclusive = !(std::abs(delta.value) > 3.0 * delta.se);

  ExperimentResult res;
  res.table = Table({"d", "n_samples", "mean_x1", "mean_x1_se", "bias", "bias_se", "sqrt_d_delta", "sqrt_d_delta_se",
                     "ratio", "ratio_se", "w1_lower", "w1_coord", "variance_x1", "variance_x1_se"});
  std::vector<double> ds, w1s;
  json ratios = json::array();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const ChainRun& r = runs[i];
    const double sd = std::sqrt(static_cast<double>(dims[i]));
    const Estimate bias{r.mean(0) - pi_mean, r.mean_se(0)};
    const Estimate pred{sd * delta.value, sd * delta.se};
    const double ratio = bias.value / pred.value;
    // Runs are independent except at d = 1, where the ratio is exact.
    const double ratio_se = dims[i] == 1 ? 0.0
                                         : std::abs(ratio) * std::hypot(bias.se / bias.value, delta.se / delta.value);
    Eigen::Index arg = 0;
    const double w1 = (r.mean.array() - pi_mean).abs().maxCoeff(&arg);
    res.table.add({static_cast<std::int64_t>(dims[i]), static_cast<std::int64_t>(r.total_samples()), r.mean(0),
                   r.mean_se(0), bias.value, bias.se, pred.value, pred.se, ratio, ratio_se, w1,
                   static_cast<std::int64_t>(arg), r.variance(0), r.variance_se(0)});
    ds.push_back(static_cast<double>(dims[i]));
    w1s.push_back(w1);
    ratios.push_back({{"d", dims[i]}, {"ratio", ratio}, {"ratio_se", ratio_se}});
  }
  res.summary = {{"p", rm.marginal().p},
                 {"mu1", rm.marginal().mu1},
                 {"mu2", rm.marginal().mu2},
                 {"h", base.h},
                 {"log_concavity_margin", rm.stats().margin},
                 {"pi_mean_x1", pi_mean},
                 {"pi_mean_x1_method", "exact/formula"},
                 {"pi_variance_x1", rm.stats().variance},
                 {"delta", estimate_json(delta)},
                 {"delta_samples", r1.total_samples()},
                 {"delta_variance", estimate_json({r1.variance(0), r1.variance_se(0)})},
                 {"inconclusive", inconclusive},
                 {"ratios", ratios},
                 {"w1_lower_fit_vs_d", fit_if_possible(ds, w1s)}};
  return res;
}

// ---------------------------------------------------------------- theory-bounds

ExperimentResult cmd_theory_bounds(const json& config, const RunContext& ctx) {
  Common c = open(config, "theory-bounds", ctx);
  StepConfig base;
  if (c.root.has("sampler")) {
    const JsonReader s = c.root.child("sampler");
    base = parse_step_config(s);
    s.finish();
  }
  const JsonReader sweep = c.root.child_or_empty("sweep");
  const auto hs = sweep_steps(sweep, base);
  const auto dims = sweep_dims(sweep, c.root);
  sweep.finish();
  const json& pot_spec = c.root.raw("potential");

  const JsonReader b = c.root.child_or_empty("bounds");
  BoundInputs over;
  over.alpha = b.number("alpha", kNaN);
  over.beta = b.number("beta", kNaN);
  if (b.has("grad_inf_sq")) over.grad_inf_sq = b.number("grad_inf_sq");
  if (b.has("n_max")) over.n_cap = b.integer("n_max");
  std::string profile_kind = "graph";
  std::vector<std::uint64_t> explicit_profile;
  if (b.has("profile")) {
    const json& pj = b.raw("profile");
    if (pj.is_string()) {
      profile_kind = pj.get<std::string>();
      if (profile_kind != "graph" && profile_kind != "dense") {
        throw ConfigError("/bounds/profile", "expected graph, dense or an array of s_k");
      }
    } else {
      profile_kind = "explicit";
      explicit_profile = b.integers("profile");
    }
  }
  std::optional<PolynomialGrowth> growth;
  if (b.has("growth")) {
    const JsonReader g = b.child("growth");
    growth = PolynomialGrowth{g.number("c"), g.number("n")};
    g.finish();
  }
  b.finish();
  std::optional<PropagatorOptions> prop;
  if (c.root.has("propagator")) {
    const JsonReader r = c.root.child("propagator");
    PropagatorOptions o;
    o.max_n = r.integer("max_n", o.max_n);
    o.trials = r.integer("trials", o.trials);
    o.random_points = r.boolean("random_points", o.random_points);
    o.random_radius = r.number("radius", o.random_radius);
    o.thin = r.integer("thin", o.thin);
    r.finish();
    prop = o;
  }
  c.root.finish();

  struct Job {
    std::size_t d;
    double h;
    PotentialPtr p;
    BoundReport report;
    std::optional<ProductBound> product;
    std::optional<PropagatorReport> prop;
  };
  std::vector<Job> jobs;
  for (std::size_t d : dims) {
    PotentialPtr p = build_potential(pot_spec, "/potential", d);
    for (double h : hs) jobs.push_back({d, h, p, {}, {}, {}});
  }
  // Validate every input before spending time.
  std::vector<BoundInputs> inputs;
  for (const auto& j : jobs) {
    BoundInputs in;
    in.alpha = std::isnan(over.alpha) ? j.p->alpha() : over.alpha;
    in.beta = std::isnan(over.beta) ? j.p->beta() : over.beta;
    in.h = j.h;
    in.d = j.d;
    in.grad_inf_sq = over.grad_inf_sq;
    in.growth = growth;
    in.n_cap = over.n_cap;
    in = checked("/bounds/profile", [&] {
      if (profile_kind == "dense") {
        in.profile = constant_profile(j.d, j.d);
      } else if (profile_kind == "explicit") {
        std::vector<std::size_t> s(explicit_profile.begin(), explicit_profile.end());
        in.profile = SparsityProfile(j.d, s, false);
      } else {
        in.profile = sparsity_profile(j.p->graph(), required_k(j.d, j.h, in.alpha, in.beta));
      }
      return in;
    });
    checked("/sweep", [&] { in.validate(); return 0; });
    if (prop && j.h > 1.0 / j.p->beta() * (1.0 + 1e-12)) throw ConfigError("/sweep/h", "propagator check needs h <= 1/beta");
    if (prop && j.d > 512) throw ConfigError("/propagator", "propagator check supports d <= 512");
    inputs.push_back(std::move(in));
  }

  parallel_for(jobs.size(), c.threads, [&](std::size_t k) {
    Job& j = jobs[k];
    try {
      j.report = bias_bound_optimized(inputs[k]);
    } catch (const InputError& e) {
      // Queried s_k beyond an explicit, non-saturated profile.
      throw ConfigError("/bounds/profile", e.what());
    }
    if (is_product_measure(*j.p)) j.product = product_bias_bound(inputs[k].alpha, inputs[k].beta, j.h, j.d);
    if (prop) {
      PropagatorOptions o = *prop;
      o.h = j.h;
      o.seed = point_seed(c.header.seed, 4, j.d, j.h);
      j.prop = propagator_check(*j.p, o);
    }
  });

  ExperimentResult res;
  res.table = Table({"d", "h", "n", "r_n", "s_r_n", "contraction", "feasible", "value"});
  Table prop_table({"d", "h", "n", "max_p", "bound_p", "max_j", "bound_j"});
  json reports = json::array();
  bool any_prop_violation = false;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const Job& j = jobs[k];
    const BoundReport& r = j.report;
    const BoundInputs& in = inputs[k];
    for (const auto& v : r.curve) {
      const std::size_t rn = r_index(v.n, in.h, in.beta, in.d);
      res.table.add({static_cast<std::int64_t>(j.d), j.h, static_cast<std::int64_t>(v.n), static_cast<std::int64_t>(rn),
                     static_cast<std::int64_t>(in.profile.at(rn)), v.contraction, static_cast<std::int64_t>(v.feasible),
                     v.value});
    }
    json rep = {{"d", j.d},
                {"h", j.h},
                {"alpha", in.alpha},
                {"beta", in.beta},
                {"q", in.q()},
                {"profile", profile_kind},
                {"n_max", r.n_max},
                {"n_proof", r.n_proof},
                {"feasible", r.feasible},
                {"best_n", r.best_n},
                {"best_value", r.best_value},
                {"at_proof_n",
                 {{"n", r.at_proof_n.n},
                  {"contraction", r.at_proof_n.contraction},
                  {"feasible", r.at_proof_n.feasible},
                  {"value", r.at_proof_n.value}}},
                {"growth", {{"c", r.growth.c}, {"n", r.growth.n}}},
                {"polynomial_branch", r.polynomial_branch},
                {"dense_branch", r.dense_branch},
                {"grad_inf_sq_used", r.grad_inf_sq_used},
                {"one_step_error_bound", one_step_error_bound(j.h, r.grad_inf_sq_used, j.d)},
                {"constants", "proof-derived, not optimized"}};
    if (j.product) rep["product_bound"] = {{"value", j.product->value}, {"simplified", j.product->simplified}};
    if (j.prop) {
      const PropagatorReport& pr = *j.prop;
      any_prop_violation = any_prop_violation || !pr.ok();
      json pj = {{"trials", pr.trials},
                 {"max_n", pr.max_n},
                 {"checks", pr.checks},
                 {"sparsity_violations", pr.sparsity_violations},
                 {"p_violations", pr.p_violations},
                 {"j_violations", pr.j_violations},
                 {"max_ratio_p", pr.max_ratio_p},
                 {"max_ratio_j", pr.max_ratio_j},
                 {"identity_norm", pr.identity_norm},
                 {"ok", pr.ok()}};
      if (pr.witness) {
        pj["witness"] = {{"trial", pr.witness->trial}, {"n", pr.witness->n}, {"claim", pr.witness->claim},
                         {"actual", pr.witness->actual}, {"bound", pr.witness->bound}, {"row", pr.witness->row},
                         {"col", pr.witness->col}};
      }
      rep["propagator"] = std::move(pj);
      for (const auto& row : pr.rows) {
        prop_table.add({static_cast<std::int64_t>(j.d), j.h, static_cast<std::int64_t>(row.n), row.max_p, row.bound_p,
                        row.max_j, row.bound_j});
      }
    }
    reports.push_back(std::move(rep));
  }
  res.summary = {{"reports", reports}};
  if (prop) {
    res.summary["propagator_ok"] = !any_prop_violation;
    res.extra_tables.emplace_back("propagator.csv", std::move(prop_table));
  }
  return res;
}

// ---------------------------------------------------------------- asymptotic-check

PiReference parse_pi_reference(const JsonReader& r, std::size_t threads) {
  PiReference ref;
  const std::string kind = r.string("kind", "auto");
  if (kind == "auto") {
    ref.kind = PiReference::Kind::Auto;
  } else if (kind == "exact_gaussian") {
    ref.kind = PiReference::Kind::ExactGaussian;
  } else if (kind == "mala") {
    ref.kind = PiReference::Kind::Mala;
  } else {
    throw ConfigError(r.at("kind"), "unknown reference '" + kind + "'");
  }
  ref.mala_h = r.number("mala_h", 0.0);
  ref.burn_in = r.integer("burn_in", 0);
  ref.n_chains = r.integer("n_chains", 1);
  if (ref.n_chains == 0) throw ConfigError(r.at("n_chains"), "need at least one chain");
  ref.threads = threads;
  return ref;
}

ExperimentResult cmd_asymptotic_check(const json& config, const RunContext& ctx) {
  Common c = open(config, "asymptotic-check", ctx);
  const json& pot_spec = c.root.raw("potential");
  const PotentialPtr p = build_potential(pot_spec, "/potential");
  std::vector<Observable> observables;
  if (c.root.has("observables")) {
    const json& arr = c.root.raw("observables");
    if (!arr.is_array() || arr.empty()) throw ConfigError("/observables", "expected a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      observables.push_back(parse_observable(arr[i], "/observables/" + std::to_string(i)));
      if (observables.back().min_dim() > p->dim()) {
        throw ConfigError("/observables/" + std::to_string(i), "observable uses coordinates beyond d");
      }
    }
  } else {
    observables.push_back(Observable::product(0, 0));
  }
  const JsonReader refr = c.root.child_or_empty("reference");
  const PiReference ref = parse_pi_reference(refr, c.threads);
  refr.finish();
  if (ref.kind == PiReference::Kind::ExactGaussian && !gaussian_view(*p)) {
    throw ConfigError("/reference/kind", "exact_gaussian reference requires a Gaussian target");
  }

  std::uint64_t fo_n = 0;
  if (c.root.has("first_order")) {
    const JsonReader r = c.root.child("first_order");
    fo_n = r.integer("n_mc");
    r.finish();
  }
  std::vector<double> h_grid;
  StepConfig emp;
  std::uint64_t n_ref = 0;
  if (c.root.has("empirical")) {
    const JsonReader r = c.root.child("empirical");
    h_grid = r.numbers("h_grid");
    emp.n_steps = r.integer("n_steps");
    if (r.has("burn_in")) emp.burn_in = r.integer("burn_in");
    emp.n_chains = r.integer("n_chains", 1);
    n_ref = r.integer("n_ref");
    r.finish();
    if (h_grid.size() < 4) throw ConfigError("/empirical/h_grid", "need at least 4 step sizes");
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
      StepConfig probe = emp;
      probe.h = h_grid[i];
      checked("/empirical/h_grid/" + std::to_string(i), [&] { validate_step_config(probe, *p); return 0; });
    }
  }
  std::vector<std::size_t> k_grid, k_dims;
  std::uint64_t k_n = 0;
  if (c.root.has("scaling")) {
    const JsonReader r = c.root.child("scaling");
    for (auto k : r.integers("k_grid")) k_grid.push_back(k);
    if (r.has("d")) {
      for (auto d : r.integers("d")) k_dims.push_back(d);
    } else {
      k_dims.push_back(p->dim());
    }
    k_n = r.integer("n_mc");
    r.finish();
    if (k_grid.empty()) throw ConfigError("/scaling/k_grid", "expected a non-empty list");
    for (std::size_t d : k_dims) {
      for (std::size_t k : k_grid) {
        if (k == 0 || k > d) throw ConfigError("/scaling/k_grid", "K must lie in [1, d] for every d");
      }
    }
  }
  c.root.finish();

  ExperimentResult res;
  res.table = Table({"section", "observable", "d", "x", "value", "se"});
  json obs_summary = json::array();
  const auto d_cell = static_cast<std::int64_t>(p->dim());
  for (std::size_t i = 0; i < observables.size(); ++i) {
    const Observable& f = observables[i];
    json o = {{"name", f.name()}};
    if (fo_n > 0) {
      const auto rep = first_order_slope(*p, f, fo_n, point_seed(c.header.seed, 5, i), ref);
      res.table.add({std::string("formula_a"), f.name(), d_cell, kNaN, rep.formula_a.value, rep.formula_a.se});
      res.table.add({std::string("formula_b"), f.name(), d_cell, kNaN, rep.formula_b.value, rep.formula_b.se});
      const double comb = std::hypot(rep.formula_a.se, rep.formula_b.se);
      o["formula_a"] = estimate_json(rep.formula_a);
      o["formula_b"] = estimate_json(rep.formula_b);
      o["formula_gap_z"] = comb > 0.0 ? std::abs(rep.formula_a.value - rep.formula_b.value) / comb : 0.0;
      o["mean_f"] = estimate_json(rep.mean_f);
      o["reference"] = rep.reference;
      o["acceptance_rate"] = rep.acceptance_rate;
      o["n_samples"] = rep.n_samples;
    }
    if (!h_grid.empty()) {
      StepConfig cfg = emp;
      cfg.seed = point_seed(c.header.seed, 6, i);
      cfg.threads = c.threads;
      const auto es = empirical_slope(*p, f, h_grid, cfg, n_ref, ref);
      for (const auto& pt : es.points) {
        res.table.add({std::string("bias"), f.name(), d_cell, pt.h, pt.bias.value, pt.bias.se});
      }
      res.table.add({std::string("empirical_slope"), f.name(), d_cell, kNaN, es.slope.value, es.slope.se});
      o["empirical_slope"] = estimate_json(es.slope);
      if (o.contains("formula_b")) {
        const double fb = o["formula_b"]["value"].get<double>();
        o["empirical_vs_formula_rel"] = std::abs(es.slope.value - fb) / std::abs(fb);
      }
    }
    obs_summary.push_back(std::move(o));
  }
  res.summary = {{"family", p->family()}, {"d", p->dim()}, {"observables", obs_summary}};

  if (!k_grid.empty()) {
    json per_d = json::array();
    std::vector<ScalingReport> reps;
    for (std::size_t j = 0; j < k_dims.size(); ++j) {
      const PotentialPtr pd = build_potential(pot_spec, "/potential", k_dims[j]);
      reps.push_back(sqrt_k_scaling_check(*pd, k_grid, k_n, point_seed(c.header.seed, 7, k_dims[j]), ref));
      const ScalingReport& r = reps.back();
      for (const auto& row : r.rows) {
        res.table.add({std::string("k_slope"), "f_K", static_cast<std::int64_t>(k_dims[j]), static_cast<double>(row.k),
                       row.slope.value, row.slope.se});
      }
      per_d.push_back({{"d", k_dims[j]},
                       {"resolved", r.resolved},
                       {"exponent", r.resolved ? json(r.exponent) : json(nullptr)},
                       {"exponent_se", r.resolved ? json(r.exponent_se) : json(nullptr)},
                       {"c1_proxy", r.c1_proxy},
                       {"n_samples", r.n_samples},
                       {"acceptance_rate", r.acceptance_rate}});
    }
    json agreement = json::array();
    for (std::size_t idx = 0; idx < k_grid.size(); ++idx) {
      double worst = 0.0;
      for (std::size_t j = 1; j < reps.size(); ++j) {
        const auto& a = reps[0].rows[idx].slope;
        const auto& b = reps[j].rows[idx].slope;
        const double comb = std::hypot(a.se, b.se);
        worst = std::max(worst, comb > 0.0 ? std::abs(a.value - b.value) / comb : 0.0);
      }
      agreement.push_back({{"k", k_grid[idx]}, {"max_z_across_d", worst}});
    }
    res.summary["scaling"] = {{"per_d", per_d}, {"agreement", agreement}};
  }
  return res;
}

// ---------------------------------------------------------------- plot

ExperimentResult cmd_plot(const json& config, const RunContext& ctx) {
  Common c = open(config, "plot", ctx);
  const std::string source = c.root.string("source");
  const std::string kind = c.root.string("kind");
  c.root.finish();
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end() || kind == "plot") {
    throw ConfigError("/kind", "unknown experiment kind '" + kind + "'");
  }
  std::ifstream in(source);
  if (!in) throw ConfigError("/source", "cannot read " + source);
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentResult res;
  try {
    res.table = Table::parse_csv(buf.str());
  } catch (const InputError& e) {
    throw ConfigError("/source", e.what());
  }
  res.summary = {{"source", source}, {"kind", kind}};
  res.plots = plots_for(kind, res.table);
  return res;
}

// ---------------------------------------------------------------- plots

std::vector<std::string> unique_values(const Table& t, const std::string& col) {
  std::vector<std::string> out;
  for (const auto& v : t.strings(col)) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

bool has_column(const Table& t, const std::string& name) {
  return std::find(t.columns().begin(), t.columns().end(), name) != t.columns().end();
}

Series series_of(const Table& t, const std::string& label, const std::string& x, const std::string& y,
                 const std::string& err = {}, bool dashed = false) {
  Series s;
  s.label = label;
  s.x = t.numbers(x);
  s.y = t.numbers(y);
  if (!err.empty()) s.err = t.numbers(err);
  s.dashed = dashed;
  return s;
}

std::string file_tag(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-') ch = '_';
  }
  return s;
}

}  // namespace

std::vector<std::pair<std::string, Chart>> plots_for(const std::string& kind, const Table& t) {
  std::vector<std::pair<std::string, Chart>> out;
  if (t.size() == 0) return out;
  if (kind == "run-chain") {
    Chart ch{"Per-coordinate variance", "coordinate", "variance", false, false, {}};
    for (const auto& h : unique_values(t, "h")) {
      const Table sub = t.where("h", h);
      ch.series.push_back(series_of(sub, "ULA h=" + h, "coord", "variance", "variance_se"));
      ch.series.push_back(series_of(sub, "pi_h exact h=" + h, "coord", "variance_pi_h", {}, true));
    }
    out.emplace_back("variance.svg", std::move(ch));
  } else if (kind == "bias-scan" || kind == "coupling-estimate") {
    for (const auto& h : unique_values(t, "h")) {
      const Table sub = t.where("h", h);
      Chart ch{"Bias vs dimension, h=" + h, "d", "distance", true, true, {}};
      ch.series.push_back(series_of(sub, "marginal W2 (lower)", "d", "lower_w2", "lower_w2_se"));
      ch.series.push_back(series_of(sub, "coupling l_inf (upper)", "d", "upper_linf", "upper_linf_se"));
      ch.series.push_back(series_of(sub, "coupling l_2 gap", "d", "gap_l2", "gap_l2_se"));
      if (has_column(sub, "bound_value")) ch.series.push_back(series_of(sub, "theory bound", "d", "bound_value", {}, true));
      out.emplace_back("bias_vs_d_h" + file_tag(h) + ".svg", std::move(ch));
    }
    const auto hs = unique_values(t, "h");
    if (hs.size() > 1) {
      for (const auto& d : unique_values(t, "d")) {
        const Table sub = t.where("d", d);
        Chart ch{"Bias vs step size, d=" + d, "h", "distance", true, true, {}};
        ch.series.push_back(series_of(sub, "coupling l_inf (upper)", "h", "upper_linf", "upper_linf_se"));
        ch.series.push_back(series_of(sub, "marginal W2 (lower)", "h", "lower_w2", "lower_w2_se"));
        ch.series.push_back(series_of(sub, "Gaussian formula", "h", "formula_upper", "formula_upper_se", true));
        if (has_column(sub, "product_bound")) {
          ch.series.push_back(series_of(sub, "product bound", "h", "product_bound", {}, true));
        }
        out.emplace_back("bias_vs_h_d" + file_tag(d) + ".svg", std::move(ch));
      }
    }
  } else if (kind == "negative-example") {
    Chart ch{"First-coordinate bias of the rotated mixture", "d", "bias", true, true, {}};
    ch.series.push_back(series_of(t, "measured bias", "d", "bias", "bias_se"));
    ch.series.push_back(series_of(t, "sqrt(d) delta", "d", "sqrt_d_delta", "sqrt_d_delta_se", true));
    out.emplace_back("bias_vs_d.svg", std::move(ch));
  } else if (kind == "theory-bounds") {
    Chart ch{"Bias bound vs horizon N", "N", "bound", false, true, {}};
    for (const auto& d : unique_values(t, "d")) {
      const Table sd = t.where("d", d);
      for (const auto& h : unique_values(sd, "h")) {
        ch.series.push_back(series_of(sd.where("h", h), "d=" + d + " h=" + h, "n", "value"));
      }
    }
    out.emplace_back("bound_vs_n.svg", std::move(ch));
  } else if (kind == "asymptotic-check") {
    const Table bias = t.where("section", "bias");
    if (bias.size() > 0) {
      Chart ch{"Bias vs step size", "h", "E_pi f - E_pi_h f", false, false, {}};
      for (const auto& f : unique_values(bias, "observable")) {
        ch.series.push_back(series_of(bias.where("observable", f), f, "x", "value", "se"));
      }
      out.emplace_back("bias_vs_h.svg", std::move(ch));
    }
    const Table ks = t.where("section", "k_slope");
    if (ks.size() > 0) {
      Chart ch{"First-order slope vs K", "K", "slope", true, true, {}};
      for (const auto& d : unique_values(ks, "d")) {
        Series s = series_of(ks.where("d", d), "d=" + d, "x", "value", "se");
        for (double& v : s.y) v = std::abs(v);
        ch.series.push_back(std::move(s));
      }
      out.emplace_back("slope_vs_k.svg", std::move(ch));
    }
  }
  return out;
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"bias-scan",  "negative-example",  "theory-bounds", "coupling-estimate",
                                                 "run-chain", "asymptotic-check", "plot"};
  return kinds;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

ExperimentResult run_experiment(const std::string& kind, const json& config, const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res;
  if (kind == "run-chain") {
    res = cmd_run_chain(config, ctx);
  } else if (kind == "bias-scan" || kind == "coupling-estimate") {
    res = cmd_coupling(config, ctx, kind);
  } else if (kind == "negative-example") {
    res = cmd_negative_example(config, ctx);
  } else if (kind == "theory-bounds") {
    res = cmd_theory_bounds(config, ctx);
  } else if (kind == "asymptotic-check") {
    res = cmd_asymptotic_check(config, ctx);
  } else if (kind == "plot") {
    res = cmd_plot(config, ctx);
  } else {
    throw ConfigError("/experiment", "unknown experiment kind '" + kind + "'");
  }
  res.experiment = kind;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json summary = {{"experiment", kind},
                  {"schema_version", kSchemaVersion},
                  {"seed", ctx.seed ? *ctx.seed : config.value("seed", std::uint64_t{0})},
                  {"config", config}};
  summary.update(res.summary);
  res.summary = std::move(summary);

  const std::string csv = kind == "plot" ? std::string() : res.table.to_csv();
  if (kind != "plot") res.plots = plots_for(kind, Table::parse_csv(csv));
  if (ctx.write_files) {
    std::filesystem::create_directories(ctx.out_dir / "plots");
    if (kind != "plot") {
      write_text(ctx.out_dir / "results.csv", csv);
      write_text(ctx.out_dir / "summary.json", res.summary.dump(2) + "\n");
      for (const auto& [name, table] : res.extra_tables) write_text(ctx.out_dir / name, table.to_csv());
    }
    write_text(ctx.out_dir / "timing.json", json{{"wall_seconds", res.wall_seconds}}.dump(2) + "\n");
    for (const auto& [name, chart] : res.plots) write_text(ctx.out_dir / "plots" / name, render_svg(chart));
  }
  return res;
}

}  // namespace deloc
