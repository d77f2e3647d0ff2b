#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deloc/potentials.hpp"
#include "deloc/samplers.hpp"

namespace deloc {

inline constexpr int kSchemaVersion = 1;

/// Typed access to one JSON object. Every error names the JSON pointer of the
/// offending value, and finish() rejects keys that were never read.
class JsonReader {
 public:
  JsonReader(const nlohmann::json& obj, std::string pointer);

  const std::string& pointer() const { return pointer_; }
  std::string at(const std::string& key) const { return pointer_ + "/" + key; }
  bool has(const std::string& key) const;
  const nlohmann::json& raw(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::uint64_t integer(const std::string& key) const;
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::uint64_t> integers(const std::string& key) const;
  JsonReader child(const std::string& key) const;
  /// Empty object when the key is absent.
  JsonReader child_or_empty(const std::string& key) const;

  void finish() const;

 private:
  const nlohmann::json* obj_;
  std::string pointer_;
  mutable std::set<std::string> used_;
};

/// Builds a potential from a config block such as
/// {"family": "tridiagonal", "d": 64, "lambda_min": 1, "c": 1}.
/// `d_override` replaces "d" (sweeps). Non-log-concave mixtures and other
/// invalid parameters are reported as ConfigError at `pointer`.
PotentialPtr build_potential(const nlohmann::json& spec, const std::string& pointer,
                             std::optional<std::size_t> d_override = std::nullopt);

/// Fields h, n_steps, burn_in, n_chains, store_every of a "sampler" block.
/// h may be absent when a sweep supplies it.
StepConfig parse_step_config(const JsonReader& sampler);

Reference parse_reference(const JsonReader& reference);

/// Top-level fields shared by every experiment.
struct ExperimentHeader {
  std::string experiment;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

/// Checks schema_version and that "experiment" equals `expected`.
ExperimentHeader parse_header(const JsonReader& root, const std::string& expected);

nlohmann::json read_json_file(const std::string& path);

}  // namespace deloc
