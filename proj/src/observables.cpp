#include "deloc/observables.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "deloc/errors.hpp"

namespace deloc {

Observable::Observable(std::string name, double constant, std::vector<Linear> linear,
                       std::vector<Quadratic> quadratic)
    : name_(std::move(name)), constant_(constant), linear_(std::move(linear)), quadratic_(std::move(quadratic)) {
  for (const auto& l : linear_) min_dim_ = std::max(min_dim_, l.i + 1);
  for (const auto& q : quadratic_) {
    min_dim_ = std::max({min_dim_, q.i + 1, q.j + 1});
    if (q.i == q.j) laplacian_ += 2.0 * q.coef;
  }
}

Observable Observable::coordinate(std::size_t i) { return {"x" + std::to_string(i), 0.0, {{i, 1.0}}, {}}; }

Observable Observable::product(std::size_t i, std::size_t j) {
  const std::string name = i == j ? "x" + std::to_string(i) + "^2" : "x" + std::to_string(i) + "*x" + std::to_string(j);
  return {name, 0.0, {}, {{i, j, 1.0}}};
}

Observable Observable::coordinate_sum(std::size_t k) {
  if (k == 0) throw InputError("coordinate sum needs K >= 1");
  std::vector<Linear> terms;
  for (std::size_t i = 0; i < k; ++i) terms.push_back({i, 1.0});
  return {"sum_" + std::to_string(k), 0.0, std::move(terms), {}};
}

Observable Observable::linear(const std::vector<double>& coefs) {
  std::vector<Linear> terms;
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    if (coefs[i] != 0.0) terms.push_back({i, coefs[i]});
  }
  return {"linear", 0.0, std::move(terms), {}};
}

Observable Observable::scaled(double s) const {
  Observable out = *this;
  out.name_ = std::to_string(s) + "*" + name_;
  out.constant_ *= s;
  for (auto& l : out.linear_) l.coef *= s;
  for (auto& q : out.quadratic_) q.coef *= s;
  out.laplacian_ *= s;
  return out;
}

Observable Observable::shifted(double c) const {
  Observable out = *this;
  out.name_ = name_ + "+" + std::to_string(c);
  out.constant_ += c;
  return out;
}

double Observable::operator()(VecRef x) const {
  double v = constant_;
  for (const auto& l : linear_) v += l.coef * x(l.i);
  for (const auto& q : quadratic_) v += q.coef * x(q.i) * x(q.j);
  return v;
}

namespace {

std::size_t index_field(const nlohmann::json& spec, const std::string& key, const std::string& pointer) {
  if (!spec.contains(key)) throw ConfigError(pointer + "/" + key, "missing field");
  const auto& v = spec.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(pointer + "/" + key, "expected index >= 0");
  return v.get<std::size_t>();
}

}  // namespace

Observable parse_observable(const nlohmann::json& spec, const std::string& pointer) {
  if (!spec.is_object()) throw ConfigError(pointer, "observable must be an object");
  if (!spec.contains("kind") || !spec.at("kind").is_string()) throw ConfigError(pointer + "/kind", "missing kind");
  const auto kind = spec.at("kind").get<std::string>();
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"coordinate", {"i"}}, {"product", {"i", "j"}}, {"coordinate_sum", {"K"}}, {"linear", {"coefs"}}};
  if (const auto it = allowed.find(kind); it != allowed.end()) {
    for (const auto& [key, value] : spec.items()) {
      if (key != "kind" && key != "scale" && key != "shift" && !it->second.count(key)) {
        throw ConfigError(pointer + "/" + key, "unknown field");
      }
    }
  }
  Observable f;
  if (kind == "coordinate") {
    f = Observable::coordinate(index_field(spec, "i", pointer));
  } else if (kind == "product") {
    f = Observable::product(index_field(spec, "i", pointer), index_field(spec, "j", pointer));
  } else if (kind == "coordinate_sum") {
    const auto k = index_field(spec, "K", pointer);
    if (k == 0) throw ConfigError(pointer + "/K", "K must be >= 1");
    f = Observable::coordinate_sum(k);
  } else if (kind == "linear") {
    if (!spec.contains("coefs") || !spec.at("coefs").is_array()) {
      throw ConfigError(pointer + "/coefs", "expected an array of numbers");
    }
    std::vector<double> coefs;
    for (const auto& c : spec.at("coefs")) {
      if (!c.is_number()) throw ConfigError(pointer + "/coefs", "expected an array of numbers");
      coefs.push_back(c.get<double>());
    }
    f = Observable::linear(coefs);
  } else {
    throw ConfigError(pointer + "/kind", "unknown observable kind '" + kind + "'");
  }
  if (spec.contains("scale")) {
    if (!spec.at("scale").is_number()) throw ConfigError(pointer + "/scale", "expected a number");
    f = f.scaled(spec.at("scale").get<double>());
  }
  if (spec.contains("shift")) {
    if (!spec.at("shift").is_number()) throw ConfigError(pointer + "/shift", "expected a number");
    f = f.shifted(spec.at("shift").get<double>());
  }
  return f;
}

}  // namespace deloc
