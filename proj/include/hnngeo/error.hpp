#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hnngeo {

enum class ErrorKind {
  SingularMatrix,
  ConjugacyMismatch,
  UnknownLetter,
  ParseError,
  BudgetExceeded,
  UnsupportedPresentation,
  OutsideBall,
  OutsideWindow,
  DegenerateGrid,
  FibreMismatch,
  PathEscapesWindow,
  InsufficientRange,
  NoValidEnvelope,
  ConfigError,
  Overflow,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures are reported through this exception; `kind()` lets
// callers (and tests) distinguish the contract violations.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hnngeo
