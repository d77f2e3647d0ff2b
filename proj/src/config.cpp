#include "deloc/config.hpp"

#include <cmath>
#include <fstream>

#include "deloc/errors.hpp"

namespace deloc {

using nlohmann::json;

JsonReader::JsonReader(const json& obj, std::string pointer) : obj_(&obj), pointer_(std::move(pointer)) {
  if (!obj.is_object()) throw ConfigError(pointer_.empty() ? "/" : pointer_, "expected an object");
}

bool JsonReader::has(const std::string& key) const { return obj_->contains(key); }

const json& JsonReader::raw(const std::string& key) const {
  if (!has(key)) throw ConfigError(at(key), "required field is missing");
  used_.insert(key);
  return obj_->at(key);
}

double JsonReader::number(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_number()) throw ConfigError(at(key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(at(key), "expected a finite number");
  return x;
}

double JsonReader::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::uint64_t JsonReader::integer(const std::string& key) const {
  const json& v = raw(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  // Accept 1e6 style literals when they are exact integers.
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x < 1.8e19 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(at(key), "expected a non-negative integer");
}

std::uint64_t JsonReader::integer(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool JsonReader::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const json& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
  return v.get<bool>();
}

std::string JsonReader::string(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_string()) throw ConfigError(at(key), "expected a string");
  return v.get<std::string>();
}

std::string JsonReader::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> JsonReader::numbers(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_array()) throw ConfigError(at(key), "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      throw ConfigError(at(key) + "/" + std::to_string(i), "expected a finite number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<std::uint64_t> JsonReader::integers(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_array()) throw ConfigError(at(key), "expected an array of integers");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json wrapper = {{"v", v[i]}};
    JsonReader r(wrapper, at(key) + "/" + std::to_string(i));
    try {
      out.push_back(r.integer("v"));
    } catch (const ConfigError&) {
      throw ConfigError(at(key) + "/" + std::to_string(i), "expected a non-negative integer");
    }
  }
  return out;
}

JsonReader JsonReader::child(const std::string& key) const { return JsonReader(raw(key), at(key)); }

JsonReader JsonReader::child_or_empty(const std::string& key) const {
  static const json empty = json::object();
  return has(key) ? child(key) : JsonReader(empty, at(key));
}

void JsonReader::finish() const {
  for (const auto& item : obj_->items()) {
    if (!used_.count(item.key())) throw ConfigError(at(item.key()), "unknown field");
  }
}

namespace {

ScalarComponent parse_component(const JsonReader& r, ScalarComponent base) {
  base.a = r.number("a", base.a);
  base.b = r.number("b", base.b);
  base.c = r.number("c", base.c);
  if (!(base.alpha() > 0.0)) throw ConfigError(r.pointer(), "component is not strongly convex (a + 2.5 min(c, 0) <= 0)");
  return base;
}

// "component" sets the default, "components" lists all d entries and
// "local" overrides selected nodes: [{"nodes": [0, 1], "b": 1, "c": 1}].
std::vector<ScalarComponent> parse_components(const JsonReader& r, std::size_t d) {
  ScalarComponent base;
  if (r.has("component")) base = parse_component(r.child("component"), base);
  std::vector<ScalarComponent> comps(d, base);
  if (r.has("components")) {
    const json& arr = r.raw("components");
    if (!arr.is_array() || arr.size() != d) {
      throw ConfigError(r.at("components"), "expected an array of " + std::to_string(d) + " components");
    }
    for (std::size_t i = 0; i < d; ++i) {
      JsonReader c(arr[i], r.at("components") + "/" + std::to_string(i));
      comps[i] = parse_component(c, base);
      c.finish();
    }
  }
  if (r.has("local")) {
    const json& arr = r.raw("local");
    if (!arr.is_array()) throw ConfigError(r.at("local"), "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string ptr = r.at("local") + "/" + std::to_string(k);
      JsonReader c(arr[k], ptr);
      const auto nodes = c.integers("nodes");
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (nodes[j] >= d) throw ConfigError(ptr + "/nodes/" + std::to_string(j), "node index out of range");
        comps[nodes[j]] = parse_component(c, comps[nodes[j]]);
      }
      c.finish();
    }
  }
  return comps;
}

std::size_t resolve_dim(const JsonReader& r, std::optional<std::size_t> d_override) {
  if (r.has("d")) {
    const auto d = r.integer("d");
    if (!d_override) {
      if (d == 0) throw ConfigError(r.at("d"), "dimension must be positive");
      return d;
    }
  }
  if (d_override) {
    if (*d_override == 0) throw ConfigError(r.at("d"), "dimension must be positive");
    return *d_override;
  }
  throw ConfigError(r.at("d"), "required field is missing");
}

InteractionGraph parse_graph(const JsonReader& r, std::size_t d) {
  const std::string type = r.string("type");
  if (type == "path") return InteractionGraph::path(d);
  if (type == "complete") return InteractionGraph::complete(d);
  if (type == "none") return InteractionGraph(d, {});
  if (type == "lattice2d") {
    std::uint64_t rows = 0, cols = 0;
    if (r.has("rows") || r.has("cols")) {
      rows = r.integer("rows");
      cols = r.integer("cols");
    } else {
      rows = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(d))));
      cols = rows;
    }
    if (rows * cols != d) throw ConfigError(r.pointer(), "rows * cols must equal d = " + std::to_string(d));
    return InteractionGraph::lattice2d(rows, cols);
  }
  if (type == "edge_list") {
    const std::string file = r.string("file");
    try {
      return InteractionGraph::read_edge_list(file, d);
    } catch (const InputError& e) {
      throw ConfigError(r.at("file"), e.what());
    }
  }
  throw ConfigError(r.at("type"), "unknown graph type '" + type + "'");
}

SpMat parse_precision(const JsonReader& r, std::size_t d) {
  const std::string type = r.string("type", "identity");
  const auto n = static_cast<Eigen::Index>(d);
  SpMat a(n, n);
  std::vector<Eigen::Triplet<double>> t;
  if (type == "identity") {
    const double s = r.number("scale", 1.0);
    for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, s);
  } else if (type == "diagonal") {
    const auto v = r.numbers("values");
    if (v.size() != d) throw ConfigError(r.at("values"), "expected " + std::to_string(d) + " values");
    for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, v[static_cast<std::size_t>(i)]);
  } else if (type == "graph") {
    // diag on the diagonal and off on every edge of the graph block.
    const double diag = r.number("diag");
    const double off = r.number("off");
    const InteractionGraph g = parse_graph(r.child("graph"), d);
    for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, diag);
    for (const auto& [i, j] : g.edges()) {
      t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), off);
      t.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i), off);
    }
  } else if (type == "entries") {
    const json& arr = r.raw("entries");
    if (!arr.is_array()) throw ConfigError(r.at("entries"), "expected an array of [i, j, value]");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const json& e = arr[k];
      const std::string ptr = r.at("entries") + "/" + std::to_string(k);
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
          !e[2].is_number()) {
        throw ConfigError(ptr, "expected [i, j, value]");
      }
      const auto i = e[0].get<std::int64_t>(), j = e[1].get<std::int64_t>();
      if (i < 0 || j < 0 || i >= n || j >= n) throw ConfigError(ptr, "index out of range");
      t.emplace_back(i, j, e[2].get<double>());
      if (i != j) t.emplace_back(j, i, e[2].get<double>());
    }
  } else {
    throw ConfigError(r.at("type"), "unknown precision type '" + type + "'");
  }
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

Vec parse_mean(const JsonReader& r, std::size_t d) {
  if (!r.has("mean")) return Vec::Zero(static_cast<Eigen::Index>(d));
  const json& m = r.raw("mean");
  if (m.is_number()) return Vec::Constant(static_cast<Eigen::Index>(d), m.get<double>());
  const auto v = r.numbers("mean");
  if (v.size() != d) throw ConfigError(r.at("mean"), "expected " + std::to_string(d) + " values");
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(d));
}

}  // namespace

PotentialPtr build_potential(const json& spec, const std::string& pointer, std::optional<std::size_t> d_override) {
  JsonReader r(spec, pointer);
  const std::string family = r.string("family");
  const std::size_t d = resolve_dim(r, d_override);
  PotentialPtr out;
  try {
    if (family == "gaussian") {
      const Vec mean = parse_mean(r, d);
      SpMat a = parse_precision(r.child_or_empty("precision"), d);
      out = std::make_shared<GaussianPotential>(mean, std::move(a));
    } else if (family == "product") {
      out = make_product(parse_components(r, d));
    } else if (family == "lattice") {
      InteractionGraph g = parse_graph(r.child("graph"), d);
      out = std::make_shared<LatticePotential>(std::move(g), parse_components(r, d));
    } else if (family == "tridiagonal") {
      out = tridiagonal_example(d, r.number("lambda_min", 1.0), r.number("c", 0.0));
    } else if (family == "rotated_mixture") {
      out = std::make_shared<RotatedMixturePotential>(d, r.number("p"), r.number("mu1"), r.number("mu2"));
    } else {
      throw ConfigError(r.at("family"), "unknown potential family '" + family + "'");
    }
  } catch (const ConstructionError& e) {
    throw ConfigError(pointer, e.what());
  }
  r.finish();
  return out;
}

StepConfig parse_step_config(const JsonReader& s) {
  StepConfig cfg;
  cfg.h = s.number("h", 0.0);
  if (s.has("h") && !(cfg.h > 0.0)) throw ConfigError(s.at("h"), "step size must be positive");
  cfg.n_steps = s.integer("n_steps", 0);
  if (s.has("burn_in")) cfg.burn_in = s.integer("burn_in");
  cfg.n_chains = s.integer("n_chains", 1);
  if (cfg.n_chains == 0) throw ConfigError(s.at("n_chains"), "need at least one chain");
  cfg.store_every = s.integer("store_every", 0);
  return cfg;
}

Reference parse_reference(const JsonReader& r) {
  const std::string kind = r.string("kind", "fine_ula");
  Reference ref;
  if (kind == "exact_gaussian") {
    ref = Reference::exact_gaussian();
  } else if (kind == "fine_ula") {
    const auto s = r.integer("substeps", 50);
    if (s == 0) throw ConfigError(r.at("substeps"), "need at least one substep");
    ref = Reference::fine_ula(s);
  } else {
    throw ConfigError(r.at("kind"), "unknown reference '" + kind + "'");
  }
  return ref;
}

ExperimentHeader parse_header(const JsonReader& root, const std::string& expected) {
  if (!root.has("schema_version")) throw ConfigError("/schema_version", "required field is missing");
  if (root.integer("schema_version") != kSchemaVersion) {
    throw ConfigError("/schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  ExperimentHeader h;
  h.experiment = root.string("experiment");
  if (h.experiment != expected) {
    throw ConfigError("/experiment", "config is for '" + h.experiment + "' but the subcommand is '" + expected + "'");
  }
  h.seed = root.integer("seed", 0);
  h.threads = root.integer("threads", 0);
  return h;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace deloc
