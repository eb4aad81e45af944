#include "ifedit/error.hpp"

namespace ifedit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Index: return "index";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Config: return "config";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace ifedit
