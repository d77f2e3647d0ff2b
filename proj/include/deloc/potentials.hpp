#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "deloc/graph.hpp"

namespace deloc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using VecRef = Eigen::Ref<const Vec>;
using VecOut = Eigen::Ref<Vec>;

/// Target potential V = -log density (up to a constant), strongly convex with
/// alpha I <= Hess V <= beta I.
class Potential {
 public:
  virtual ~Potential() = default;

  std::size_t dim() const { return graph_.dim(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const InteractionGraph& graph() const { return graph_; }
  virtual std::string family() const = 0;

  virtual double value(VecRef x) const = 0;
  /// Unchecked gradient for inner loops.
  virtual void grad_into(VecRef x, VecOut out) const = 0;
  /// Hess V(x) * v. The default forms the sparse Hessian.
  virtual void hessian_apply_into(VecRef x, VecRef v, VecOut out) const;
  virtual SpMat hessian(VecRef x) const = 0;
  /// Trace of the Hessian, i.e. Laplacian of V.
  virtual double laplacian(VecRef x) const = 0;

  /// Checked versions: throw NumericError on non-finite input.
  Vec grad(VecRef x) const;
  Vec hessian_apply(VecRef x, VecRef v) const;

 protected:
  Potential(InteractionGraph graph, double alpha, double beta);
  void set_bounds(double alpha, double beta);

 private:
  InteractionGraph graph_;
  double alpha_;
  double beta_;
};

using PotentialPtr = std::shared_ptr<const Potential>;

/// V(x) = 1/2 (x-m)^T A (x-m) with SPD precision A.
class GaussianPotential final : public Potential {
 public:
  /// Without explicit bounds, alpha and beta are the extreme eigenvalues of A:
  /// exact for diagonal A or d <= 2048, Lanczos estimates otherwise.
  GaussianPotential(Vec mean, SpMat precision, std::optional<std::pair<double, double>> bounds = std::nullopt);

  std::string family() const override { return "gaussian"; }
  double value(VecRef x) const override;
  void grad_into(VecRef x, VecOut out) const override;
  void hessian_apply_into(VecRef x, VecRef v, VecOut out) const override;
  SpMat hessian(VecRef) const override { return precision_; }
  double laplacian(VecRef) const override { return trace_; }

  const Vec& mean() const { return mean_; }
  const SpMat& precision() const { return precision_; }
  bool is_diagonal() const { return diagonal_; }

 private:
  Vec mean_;
  SpMat precision_;
  double trace_;
  bool diagonal_;
};

/// Scalar convex component v(t) = a t^2/2 + b t + c t^4/(1+t^2).
/// Since t^4/(1+t^2) has second derivative in [0, 5/2], v'' lies in
/// [a + 2.5 min(c,0), a + 2.5 max(c,0)].
struct ScalarComponent {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double alpha() const { return a + 2.5 * std::min(c, 0.0); }
  double beta() const { return a + 2.5 * std::max(c, 0.0); }
};

/// V(x) = sum_i v_i(x_i) + 1/2 sum_{(i,j) in E} (x_i - x_j)^2. With no edges
/// this is a product measure.
class LatticePotential : public Potential {
 public:
  LatticePotential(InteractionGraph graph, std::vector<ScalarComponent> components);

  std::string family() const override { return family_; }
  double value(VecRef x) const override;
  void grad_into(VecRef x, VecOut out) const override;
  void hessian_apply_into(VecRef x, VecRef v, VecOut out) const override;
  SpMat hessian(VecRef x) const override;
  double laplacian(VecRef x) const override;

  const std::vector<ScalarComponent>& components() const { return components_; }
  /// True when every component is quadratic, i.e. the target is Gaussian.
  bool is_quadratic() const;
  /// The equivalent GaussianPotential; requires is_quadratic().
  std::shared_ptr<GaussianPotential> as_gaussian() const;

 protected:
  LatticePotential(InteractionGraph graph, std::vector<ScalarComponent> components, std::string family,
                   std::optional<std::pair<double, double>> bounds);

 private:
  std::vector<ScalarComponent> components_;
  std::vector<Edge> edges_;
  std::string family_;
  // Laplacian = constant part + sum of curvature over non-quadratic nodes.
  double lap_const_ = 0.0;
  std::vector<std::size_t> curved_;
};

/// Product measure: independent coordinates, diagonal Hessian.
std::shared_ptr<LatticePotential> make_product(std::vector<ScalarComponent> components);

/// Path-graph lattice whose Hessian is tridiagonal with diagonal 2 + lambda_i(x)
/// and off-diagonal -1, where lambda_i(x) = lambda_min + c g''(x_i) with
/// g(t) = t^4/(1+t^2). alpha = lambda_min, beta = 4 + lambda_min + 2.5 c.
std::shared_ptr<LatticePotential> tridiagonal_example(std::size_t d, double lambda_min, double c = 0.0);

/// Reflector Q = I - 2uu^T with Q e_1 = (1,...,1)/sqrt(d). Q is symmetric and
/// orthogonal, so its first row is also the normalized all-ones vector.
class Householder {
 public:
  explicit Householder(std::size_t d);
  std::size_t dim() const { return d_; }
  void apply(VecRef x, VecOut out) const;
  Vec apply(VecRef x) const;
  Mat dense() const;
  const Vec& u() const { return u_; }

 private:
  std::size_t d_;
  Vec u_;
  bool identity_;
};

Mat householder_rotation(std::size_t d);

struct MixtureStats {
  double mean;
  double variance;
  double margin;  // min of v'' on the verification grid
};

/// Statistics of rho = p N(mu1, 1) + (1-p) N(mu2, 1). Throws ConstructionError
/// (carrying the margin) when -log rho is not strictly convex on [-10, 10].
MixtureStats mixture_1d_stats(double p, double mu1, double mu2);

/// Negative log-density of the 1D mixture and its derivatives.
struct Mixture1d {
  Mixture1d(double p, double mu1, double mu2);
  double p, mu1, mu2;
  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  /// Posterior weight of the first component at t.
  double responsibility(double t) const;

 private:
  double offset_;  // logit of the responsibility at t = 0
};

/// V~(x) = sum_i v(y_i), y = Q x, with v the 1D mixture potential.
class RotatedMixturePotential final : public Potential {
 public:
  RotatedMixturePotential(std::size_t d, double p, double mu1, double mu2);

  std::string family() const override { return "rotated_mixture"; }
  double value(VecRef x) const override;
  void grad_into(VecRef x, VecOut out) const override;
  void hessian_apply_into(VecRef x, VecRef v, VecOut out) const override;
  SpMat hessian(VecRef x) const override;
  double laplacian(VecRef x) const override;

  const Mixture1d& marginal() const { return mix_; }
  const Householder& rotation() const { return q_; }
  const MixtureStats& stats() const { return stats_; }

 private:
  Mixture1d mix_;
  MixtureStats stats_;
  Householder q_;
};

/// The target as a GaussianPotential when it is one (a Gaussian, or a lattice
/// with only quadratic components); nullptr otherwise.
std::shared_ptr<const GaussianPotential> gaussian_view(const Potential& p);

/// Extreme eigenvalues of a symmetric matrix (dense for d <= dense_limit,
/// Lanczos with full reorthogonalization otherwise).
std::pair<double, double> extreme_eigenvalues(const SpMat& a, std::size_t dense_limit = 2048);

}  // namespace deloc
