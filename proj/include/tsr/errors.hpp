#pragma once

#include <stdexcept>
#include <string>

namespace tsr {

// Every failure raised by the library derives from Error so the CLI can map
// categories onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A value violates a documented domain invariant.
struct InvalidArgument : Error {
  using Error::Error;
};

// Numerical failures (CLI exit code 3).
struct NumericalError : Error {
  using Error::Error;
};

struct NoRootInBracket : NumericalError {
  using NumericalError::NumericalError;
};

struct PeaksNotFound : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularSystem : NumericalError {
  using NumericalError::NumericalError;
};

struct DegenerateFrequency : NumericalError {
  using NumericalError::NumericalError;
};

// Config parse/validation failure (CLI exit code 2). `where` is a JSON pointer
// or "line N" for syntax errors.
struct ConfigError : Error {
  ConfigError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace tsr
