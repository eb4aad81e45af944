#pragma once

#include <string_view>

namespace ifedit {

// Writes "ifedit: warning: <message>" to stderr unless IFEDIT_QUIET is set.
void log_warning(std::string_view message);

}  // namespace ifedit
