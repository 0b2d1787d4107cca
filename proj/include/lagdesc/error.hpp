#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lagdesc {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
  NotInCatalog,
  InvalidArgument,
  SyntaxError,
  UnknownIdentifier,
  UnboundVariable,
  EvalDomainError,
  StepLimitExceeded,
  OverflowGuard,
  StiffnessSuspected,
  MissingInverse,
  NonFiniteOrbit,
  SweepAborted,
  EmptyBand,
  EmptyContour,
  NoSignChange,
  UndecidedRegion,
  BracketFailure,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotInCatalog: return "NotInCatalog";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::EvalDomainError: return "EvalDomainError";
    case ErrorKind::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorKind::OverflowGuard: return "OverflowGuard";
    case ErrorKind::StiffnessSuspected: return "StiffnessSuspected";
    case ErrorKind::MissingInverse: return "MissingInverse";
    case ErrorKind::NonFiniteOrbit: return "NonFiniteOrbit";
    case ErrorKind::SweepAborted: return "SweepAborted";
    case ErrorKind::EmptyBand: return "EmptyBand";
    case ErrorKind::EmptyContour: return "EmptyContour";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::UndecidedRegion: return "UndecidedRegion";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view tag() const noexcept { return to_string(kind_); }

 private:
  ErrorKind kind_;
};

/// Syntax errors additionally carry the byte offset into the source string.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : Error(ErrorKind::SyntaxError, what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace lagdesc
