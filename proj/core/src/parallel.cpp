#include "pacbayes/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pacbayes {

std::size_t worker_count() {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PACBAYES_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // Malformed values fall back to the hardware count.
    }
  }
  return hw;
}

}  // namespace pacbayes
