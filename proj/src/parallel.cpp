#include "pursuit/parallel.hpp"

#include <cstdlib>
#include <string>

#include "pursuit/errors.hpp"

namespace pursuit {

std::size_t configured_workers() {
  const char* raw = std::getenv("PURSUIT_LAB_WORKERS");
  if (!raw || !*raw) return 1;
  const std::string text(raw);
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || value == 0 || value > 1024)
    throw DomainError("PURSUIT_LAB_WORKERS must be an integer in [1, 1024], got '" + text + "'");
  return value;
}

std::size_t resolve_workers(std::size_t requested) {
  return requested == 0 ? configured_workers() : requested;
}

}  // namespace pursuit
