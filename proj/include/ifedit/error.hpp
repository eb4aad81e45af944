#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ifedit {

enum class ErrorKind {
  Shape,
  Index,
  Argument,
  Domain,
  Config,
  Transport,
  Protocol,
  Contract,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Root of every error the engine raises. The kind survives re-wrapping by
// the pipeline so the CLI can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define IFEDIT_DEFINE_ERROR(Name, Kind)                                      \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

IFEDIT_DEFINE_ERROR(ShapeError, Shape)
IFEDIT_DEFINE_ERROR(IndexError, Index)
IFEDIT_DEFINE_ERROR(ArgumentError, Argument)
IFEDIT_DEFINE_ERROR(DomainError, Domain)
IFEDIT_DEFINE_ERROR(ConfigError, Config)
IFEDIT_DEFINE_ERROR(TransportError, Transport)
IFEDIT_DEFINE_ERROR(ProtocolError, Protocol)
IFEDIT_DEFINE_ERROR(ContractError, Contract)
IFEDIT_DEFINE_ERROR(IoError, Io)

#undef IFEDIT_DEFINE_ERROR

// Raised by the pipeline; names the phase that failed and keeps the kind of
// the underlying error.
class StageError : public Error {
 public:
  StageError(std::string phase, const Error& cause)
      : Error(cause.kind(), "[" + phase + "] " + cause.what()), phase_(std::move(phase)) {}
  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

}  // namespace ifedit
