#include "ifedit/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace ifedit {

void log_warning(std::string_view message) {
  static std::mutex mu;
  if (std::getenv("IFEDIT_QUIET") != nullptr) return;
  std::lock_guard lock(mu);
  std::cerr << "ifedit: warning: " << message << '\n';
}

}  // namespace ifedit
