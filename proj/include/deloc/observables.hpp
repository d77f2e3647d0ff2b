#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deloc/potentials.hpp"

namespace deloc {

/// Polynomial observable of degree <= 2:
///   f(x) = c0 + sum_i l_i x_i + sum_t q_t x_{i_t} x_{j_t}.
/// The Laplacian is the constant 2 * sum of the diagonal quadratic weights.
class Observable {
 public:
  struct Linear {
    std::size_t i;
    double coef;
  };
  struct Quadratic {
    std::size_t i, j;
    double coef;
  };

  Observable() = default;
  Observable(std::string name, double constant, std::vector<Linear> linear, std::vector<Quadratic> quadratic);

  static Observable coordinate(std::size_t i);
  /// x_i * x_j (x_i^2 when i == j).
  static Observable product(std::size_t i, std::size_t j);
  /// x_0 + ... + x_{K-1}.
  static Observable coordinate_sum(std::size_t k);
  static Observable linear(const std::vector<double>& coefs);

  Observable scaled(double s) const;
  Observable shifted(double c) const;

  const std::string& name() const { return name_; }
  double operator()(VecRef x) const;
  double laplacian() const { return laplacian_; }
  /// One past the largest coordinate index used.
  std::size_t min_dim() const { return min_dim_; }
  bool is_linear() const { return quadratic_.empty(); }

 private:
  std::string name_;
  double constant_ = 0.0;
  std::vector<Linear> linear_;
  std::vector<Quadratic> quadratic_;
  double laplacian_ = 0.0;
  std::size_t min_dim_ = 0;
};

/// Parses {"kind": "coordinate", "i": 0} | {"kind": "product", "i": 0, "j": 1}
/// | {"kind": "coordinate_sum", "K": 4} | {"kind": "linear", "coefs": [...]},
/// each with optional "scale" and "shift". `pointer` prefixes ConfigError paths.
Observable parse_observable(const nlohmann::json& spec, const std::string& pointer);

}  // namespace deloc
