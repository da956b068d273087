#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmet {

enum class ErrorKind {
  NotPositiveDefinite,
  IndexOutOfRange,
  SingularQfim,
  DegenerateModel,
  NotApplicable,
  TooManyParameters,
  Infeasible,
  MaxIterations,
  NoConvergence,
  ChainViolation,
  ConfigParse,
  UnknownKey,
  Validation,
};

std::string_view error_name(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` distinguishes failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace qmet
