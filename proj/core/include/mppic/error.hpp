#pragma once

#include <stdexcept>
#include <string>

namespace mppic {

/// Base class for every error raised by the solver library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Numerical failure inside assembly, solve or parcel update (non-finite values etc).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Step failure that persists at the minimum time step.
class StepFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class DumpError : public Error {
 public:
  using Error::Error;
};

}  // namespace mppic
