#include "deloc/parallel.hpp"

#include <cstdlib>
#include <string>

namespace deloc {

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LANGEVIN_DELOC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace deloc
