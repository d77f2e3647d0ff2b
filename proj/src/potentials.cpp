#include "deloc/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "deloc/errors.hpp"

namespace deloc {

namespace {

void require_finite(VecRef x, const char* what) {
  if (!x.allFinite()) throw NumericError(std::string(what) + " contains non-finite entries");
}

void require_dim(const Potential& p, VecRef x) {
  if (static_cast<std::size_t>(x.size()) != p.dim()) {
    throw InputError("vector of size " + std::to_string(x.size()) + " for potential of dimension " +
                     std::to_string(p.dim()));
  }
}

InteractionGraph graph_of(const SpMat& a) {
  std::vector<Edge> edges;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      if (it.row() < it.col() && it.value() != 0.0) edges.emplace_back(it.row(), it.col());
    }
  }
  return InteractionGraph(static_cast<std::size_t>(a.rows()), edges);
}

bool is_diagonal(const SpMat& a) {
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

Potential::Potential(InteractionGraph graph, double alpha, double beta) : graph_(std::move(graph)) {
  set_bounds(alpha, beta);
}

void Potential::set_bounds(double alpha, double beta) {
  if (!(alpha > 0.0) || !std::isfinite(beta) || beta < alpha) {
    throw ConstructionError("need 0 < alpha <= beta < inf, got alpha=" + std::to_string(alpha) +
                                " beta=" + std::to_string(beta),
                            alpha);
  }
  alpha_ = alpha;
  beta_ = beta;
}

void Potential::hessian_apply_into(VecRef x, VecRef v, VecOut out) const { out = hessian(x) * v; }

Vec Potential::grad(VecRef x) const {
  require_dim(*this, x);
  require_finite(x, "x");
  Vec g(dim());
  grad_into(x, g);
  return g;
}

Vec Potential::hessian_apply(VecRef x, VecRef v) const {
  require_dim(*this, x);
  require_dim(*this, v);
  require_finite(x, "x");
  require_finite(v, "v");
  Vec out(dim());
  hessian_apply_into(x, v, out);
  return out;
}

std::pair<double, double> extreme_eigenvalues(const SpMat& a, std::size_t dense_limit) {
  const auto d = static_cast<std::size_t>(a.rows());
  if (d <= dense_limit) {
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(a), Eigen::EigenvaluesOnly);
    return {es.eigenvalues()(0), es.eigenvalues()(d - 1)};
  }
  // Lanczos with full reorthogonalization; Ritz values are widened by their
  // residual norms.
  const std::size_t m = std::min<std::size_t>(d, 300);
  Mat basis(d, m);
  Vec alphas(m);
  Vec betas(m);
  Vec q = Vec::Ones(d) / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) q(i) += 1e-3 * std::sin(1.0 + static_cast<double>(i));
  q.normalize();
  std::size_t steps = 0;
  for (std::size_t j = 0; j < m; ++j) {
    basis.col(j) = q;
    Vec w = a * q;
    alphas(j) = q.dot(w);
    w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    betas(j) = w.norm();
    steps = j + 1;
    if (betas(j) < 1e-12) break;
    q = w / betas(j);
  }
  Mat t = Mat::Zero(steps, steps);
  for (std::size_t j = 0; j < steps; ++j) {
    t(j, j) = alphas(j);
    if (j + 1 < steps) t(j, j + 1) = t(j + 1, j) = betas(j);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(t);
  const double tail = betas(steps - 1);
  const double lo = es.eigenvalues()(0) - std::abs(tail * es.eigenvectors()(steps - 1, 0));
  const double hi = es.eigenvalues()(steps - 1) + std::abs(tail * es.eigenvectors()(steps - 1, steps - 1));
  return {lo, hi};
}

// ---------------------------------------------------------------- Gaussian

GaussianPotential::GaussianPotential(Vec mean, SpMat precision, std::optional<std::pair<double, double>> bounds)
    : Potential(graph_of(precision), 1.0, 1.0), mean_(std::move(mean)), precision_(std::move(precision)) {
  const auto d = static_cast<std::size_t>(precision_.rows());
  if (precision_.cols() != precision_.rows()) throw ConstructionError("precision must be square");
  if (static_cast<std::size_t>(mean_.size()) != d) throw ConstructionError("mean and precision sizes differ");
  if (!mean_.allFinite()) throw ConstructionError("mean must be finite");
  const SpMat asym = precision_ - SpMat(precision_.transpose());
  if (asym.norm() > 1e-12 * std::max(1.0, precision_.norm())) throw ConstructionError("precision not symmetric");
  precision_.makeCompressed();
  diagonal_ = deloc::is_diagonal(precision_);
  trace_ = precision_.diagonal().sum();
  std::pair<double, double> ab;
  if (bounds) {
    ab = *bounds;
  } else if (diagonal_) {
    const Vec diag = precision_.diagonal();
    ab = {diag.minCoeff(), diag.maxCoeff()};
  } else {
    ab = extreme_eigenvalues(precision_);
  }
  if (!(ab.first > 0.0)) throw ConstructionError("precision is not positive definite", ab.first);
  set_bounds(ab.first, ab.second);
}

double GaussianPotential::value(VecRef x) const {
  const Vec r = x - mean_;
  return 0.5 * r.dot(precision_ * r);
}

void GaussianPotential::grad_into(VecRef x, VecOut out) const {
  if (diagonal_) {
    out = precision_.diagonal().cwiseProduct(x - mean_);
  } else {
    out.noalias() = precision_ * (x - mean_);
  }
}

void GaussianPotential::hessian_apply_into(VecRef, VecRef v, VecOut out) const { out.noalias() = precision_ * v; }

// ---------------------------------------------------------------- lattice

// g(t) = t^4/(1+t^2) = t^2 - 1 + 1/(1+t^2)
double ScalarComponent::value(double t) const {
  const double t2 = t * t;
  return 0.5 * a * t2 + b * t + (c != 0.0 ? c * t2 * t2 / (1.0 + t2) : 0.0);
}

double ScalarComponent::d1(double t) const {
  double out = a * t + b;
  if (c != 0.0) {
    const double s = 1.0 + t * t;
    out += c * (2.0 * t - 2.0 * t / (s * s));
  }
  return out;
}

double ScalarComponent::d2(double t) const {
  double out = a;
  if (c != 0.0) {
    const double t2 = t * t;
    const double s = 1.0 + t2;
    out += c * (2.0 + (6.0 * t2 - 2.0) / (s * s * s));
  }
  return out;
}

namespace {

std::pair<double, double> lattice_bounds(const InteractionGraph& g, const std::vector<ScalarComponent>& comps) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    // The graph Laplacian is PSD with Gershgorin radius 2 deg(i).
    lo = std::min(lo, comps[i].alpha());
    hi = std::max(hi, comps[i].beta() + 2.0 * static_cast<double>(g.degree(i)));
  }
  return {lo, hi};
}

}  // namespace

LatticePotential::LatticePotential(InteractionGraph graph, std::vector<ScalarComponent> components)
    : LatticePotential(std::move(graph), std::move(components), "", std::nullopt) {}

LatticePotential::LatticePotential(InteractionGraph graph, std::vector<ScalarComponent> components,
                                   std::string family, std::optional<std::pair<double, double>> bounds)
    : Potential(graph, 1.0, 1.0), components_(std::move(components)), family_(std::move(family)) {
  if (graph.is_complete() && graph.dim() > 1) throw ConstructionError("lattice potential needs a sparse graph");
  if (components_.size() != graph.dim()) {
    throw ConstructionError("expected " + std::to_string(graph.dim()) + " components, got " +
                            std::to_string(components_.size()));
  }
  for (const auto& comp : components_) {
    if (!std::isfinite(comp.a) || !std::isfinite(comp.b) || !std::isfinite(comp.c)) {
      throw ConstructionError("component coefficients must be finite");
    }
  }
  edges_ = graph.edges();
  lap_const_ = 2.0 * static_cast<double>(edges_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].c == 0.0) {
      lap_const_ += components_[i].a;
    } else {
      curved_.push_back(i);
    }
  }
  if (family_.empty()) family_ = edges_.empty() ? "product" : "lattice";
  const auto ab = bounds ? *bounds : lattice_bounds(graph, components_);
  if (!(ab.first > 0.0)) throw ConstructionError("lattice potential is not strongly convex", ab.first);
  set_bounds(ab.first, ab.second);
}

double LatticePotential::value(VecRef x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) v += components_[i].value(x(i));
  for (const auto& [i, j] : edges_) v += 0.5 * (x(i) - x(j)) * (x(i) - x(j));
  return v;
}

void LatticePotential::grad_into(VecRef x, VecOut out) const {
  const auto d = components_.size();
  for (std::size_t i = 0; i < d; ++i) out(i) = components_[i].d1(x(i));
  for (const auto& [i, j] : edges_) {
    const double diff = x(i) - x(j);
    out(i) += diff;
    out(j) -= diff;
  }
}

void LatticePotential::hessian_apply_into(VecRef x, VecRef v, VecOut out) const {
  const auto d = components_.size();
  for (std::size_t i = 0; i < d; ++i) out(i) = components_[i].d2(x(i)) * v(i);
  for (const auto& [i, j] : edges_) {
    const double diff = v(i) - v(j);
    out(i) += diff;
    out(j) -= diff;
  }
}

SpMat LatticePotential::hessian(VecRef x) const {
  const auto d = components_.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(d + 4 * edges_.size());
  for (std::size_t i = 0; i < d; ++i) trips.emplace_back(i, i, components_[i].d2(x(i)));
  for (const auto& [i, j] : edges_) {
    trips.emplace_back(i, i, 1.0);
    trips.emplace_back(j, j, 1.0);
    trips.emplace_back(i, j, -1.0);
    trips.emplace_back(j, i, -1.0);
  }
  SpMat h(d, d);
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

double LatticePotential::laplacian(VecRef x) const {
  double out = lap_const_;
  for (std::size_t i : curved_) out += components_[i].d2(x(i));
  return out;
}

bool LatticePotential::is_quadratic() const {
  return std::all_of(components_.begin(), components_.end(), [](const auto& c) { return c.c == 0.0; });
}

std::shared_ptr<GaussianPotential> LatticePotential::as_gaussian() const {
  if (!is_quadratic()) throw InputError("lattice potential has non-quadratic components");
  const auto d = components_.size();
  const SpMat a = hessian(Vec::Zero(d));
  // Minimizer of sum a_i t^2/2 + b_i t + laplacian term solves A m = -b.
  Vec b(d);
  for (std::size_t i = 0; i < d; ++i) b(i) = components_[i].b;
  Eigen::SimplicialLLT<SpMat> llt(a);
  if (llt.info() != Eigen::Success) throw NumericError("lattice precision factorization failed");
  Vec m = llt.solve(-b);
  return std::make_shared<GaussianPotential>(std::move(m), a, std::make_pair(alpha(), beta()));
}

std::shared_ptr<const GaussianPotential> gaussian_view(const Potential& p) {
  if (const auto* g = dynamic_cast<const GaussianPotential*>(&p)) return std::make_shared<GaussianPotential>(*g);
  if (const auto* l = dynamic_cast<const LatticePotential*>(&p); l && l->is_quadratic()) return l->as_gaussian();
  return nullptr;
}

std::shared_ptr<LatticePotential> make_product(std::vector<ScalarComponent> components) {
  InteractionGraph g(components.size(), std::span<const Edge>{});
  return std::make_shared<LatticePotential>(std::move(g), std::move(components));
}

namespace {

class TridiagonalPotential final : public LatticePotential {
 public:
  TridiagonalPotential(std::size_t d, const std::vector<ScalarComponent>& comps, double alpha, double beta)
      : LatticePotential(InteractionGraph::path(d), comps, "tridiagonal", std::make_pair(alpha, beta)) {}
};

}  // namespace

std::shared_ptr<LatticePotential> tridiagonal_example(std::size_t d, double lambda_min, double c) {
  if (d == 0) throw ConstructionError("dimension must be positive");
  if (!(lambda_min > 0.0)) throw ConstructionError("min lambda must be positive", lambda_min);
  if (!(c >= 0.0) || !std::isfinite(c)) throw ConstructionError("lambda modulation c must be >= 0");
  const auto g = InteractionGraph::path(d);
  std::vector<ScalarComponent> comps(d);
  for (std::size_t i = 0; i < d; ++i) {
    comps[i] = {lambda_min + 2.0 - static_cast<double>(g.degree(i)), 0.0, c};
  }
  // For d = 1 the Hessian is the scalar 2 + lambda; otherwise the Dirichlet
  // Laplacian has spectrum inside (0, 4).
  const double lam_max = lambda_min + 2.5 * c;
  const double alpha = d == 1 ? 2.0 + lambda_min : lambda_min;
  const double beta = d == 1 ? 2.0 + lam_max : 4.0 + lam_max;
  return std::make_shared<TridiagonalPotential>(d, comps, alpha, beta);
}

// ---------------------------------------------------------------- rotation

Householder::Householder(std::size_t d) : d_(d), u_(Vec::Zero(d)), identity_(d == 1) {
  if (d == 0) throw InputError("dimension must be positive");
  if (identity_) return;
  u_.setConstant(-1.0 / std::sqrt(static_cast<double>(d)));
  u_(0) += 1.0;
  u_.normalize();
}

void Householder::apply(VecRef x, VecOut out) const {
  if (identity_) {
    out = x;
    return;
  }
  const double s = 2.0 * u_.dot(x);
  out = x - s * u_;
}

Vec Householder::apply(VecRef x) const {
  Vec out(d_);
  apply(x, out);
  return out;
}

Mat Householder::dense() const {
  Mat q = Mat::Identity(d_, d_);
  if (!identity_) q -= 2.0 * u_ * u_.transpose();
  return q;
}

Mat householder_rotation(std::size_t d) { return Householder(d).dense(); }

// ---------------------------------------------------------------- mixture

Mixture1d::Mixture1d(double p_, double mu1_, double mu2_)
    : p(p_), mu1(mu1_), mu2(mu2_), offset_(std::log(p_ / (1.0 - p_)) - 0.5 * (mu1_ * mu1_ - mu2_ * mu2_)) {}

double Mixture1d::responsibility(double t) const {
  const double logit = offset_ + (mu1 - mu2) * t;
  return 1.0 / (1.0 + std::exp(-logit));
}

double Mixture1d::value(double t) const {
  const double l1 = std::log(p) + mu1 * t - 0.5 * mu1 * mu1;
  const double l2 = std::log1p(-p) + mu2 * t - 0.5 * mu2 * mu2;
  const double hi = std::max(l1, l2);
  return 0.5 * t * t - (hi + std::log(std::exp(l1 - hi) + std::exp(l2 - hi)));
}

double Mixture1d::d1(double t) const {
  const double r = responsibility(t);
  return t - (r * mu1 + (1.0 - r) * mu2);
}

double Mixture1d::d2(double t) const {
  const double r = responsibility(t);
  const double gap = mu1 - mu2;
  return 1.0 - r * (1.0 - r) * gap * gap;
}

MixtureStats mixture_1d_stats(double p, double mu1, double mu2) {
  if (!(p > 0.0 && p < 0.5) && !(mu1 == mu2 && p > 0.0 && p < 1.0)) {
    throw InputError("mixture weight p must lie in (0, 1/2)");
  }
  if (!std::isfinite(mu1) || !std::isfinite(mu2)) throw InputError("mixture means must be finite");
  const double mean = p * mu1 + (1.0 - p) * mu2;
  if (std::abs(mean) > 1e-12 * std::max({1.0, std::abs(mu1), std::abs(mu2)})) {
    throw InputError("mixture must be centered: p*mu1 + (1-p)*mu2 = " + std::to_string(mean));
  }
  const Mixture1d mix{p, mu1, mu2};
  constexpr int kGrid = 10000;
  double margin = std::numeric_limits<double>::infinity();
  int best = 0;
  for (int k = 0; k < kGrid; ++k) {
    const double t = -10.0 + 20.0 * k / (kGrid - 1);
    if (mix.d2(t) < margin) {
      margin = mix.d2(t);
      best = k;
    }
  }
  // Polish the grid minimum so alpha is not overstated between grid points.
  const double step = 20.0 / (kGrid - 1);
  const double t0 = -10.0 + step * best;
  const auto polished =
      boost::math::tools::brent_find_minima([&](double t) { return mix.d2(t); }, std::max(-10.0, t0 - step),
                                            std::min(10.0, t0 + step), std::numeric_limits<double>::digits);
  margin = std::min(margin, polished.second);
  if (!(margin > 0.0)) {
    throw ConstructionError("mixture is not log-concave on [-10, 10]: min v'' = " + std::to_string(margin), margin);
  }
  const double second = p * (1.0 + mu1 * mu1) + (1.0 - p) * (1.0 + mu2 * mu2);
  return {0.0, second - mean * mean, margin};
}

RotatedMixturePotential::RotatedMixturePotential(std::size_t d, double p, double mu1, double mu2)
    : Potential(InteractionGraph::complete(d), 1.0, 1.0),
      mix_{p, mu1, mu2},
      stats_(mixture_1d_stats(p, mu1, mu2)),
      q_(d) {
  // v'' <= 1 everywhere; the grid margin certifies the lower bound.
  set_bounds(stats_.margin, 1.0);
}

double RotatedMixturePotential::value(VecRef x) const {
  const Vec y = q_.apply(x);
  double v = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) v += mix_.value(y(i));
  return v;
}

void RotatedMixturePotential::grad_into(VecRef x, VecOut out) const {
  // Q is symmetric, so V(Q^T x) = V(Q x) and the gradient is Q grad V(Q x).
  thread_local Vec y;
  y.resize(x.size());
  q_.apply(x, y);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = mix_.d1(y(i));
  q_.apply(y, out);
}

void RotatedMixturePotential::hessian_apply_into(VecRef x, VecRef v, VecOut out) const {
  Vec y = q_.apply(x);
  Vec w = q_.apply(v);
  for (Eigen::Index i = 0; i < y.size(); ++i) w(i) *= mix_.d2(y(i));
  q_.apply(w, out);
}

SpMat RotatedMixturePotential::hessian(VecRef x) const {
  const Vec y = q_.apply(x);
  Vec diag(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) diag(i) = mix_.d2(y(i));
  const Mat q = q_.dense();
  const Mat h = q * diag.asDiagonal() * q;
  return h.sparseView();
}

double RotatedMixturePotential::laplacian(VecRef x) const {
  const Vec y = q_.apply(x);
  double out = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) out += mix_.d2(y(i));
  return out;
}

}  // namespace deloc
