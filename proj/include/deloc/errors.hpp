#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace deloc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Precondition violation on a caller-supplied argument.
struct InputError : Error {
  using Error::Error;
};

/// Non-finite value where a finite one is required.
struct NumericError : Error {
  using Error::Error;
};

/// Invalid parameters for constructing a potential or sampler.
struct ConstructionError : Error {
  explicit ConstructionError(const std::string& what, double margin = 0.0) : Error(what), margin_(margin) {}
  /// Convexity margin that caused the rejection, when applicable.
  double margin() const { return margin_; }

 private:
  double margin_;
};

/// A chain left the finite region (or crossed the divergence threshold).
struct DivergedError : Error {
  DivergedError(const std::string& what, std::uint64_t iteration) : Error(what), iteration_(iteration) {}
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::uint64_t iteration_;
};

/// Invalid experiment configuration; `pointer` is a JSON pointer into the config.
struct ConfigError : Error {
  ConfigError(std::string pointer, const std::string& message)
      : Error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace deloc
