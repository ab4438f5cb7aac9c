#pragma once

#include <stdexcept>
#include <string>

namespace rdreg {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A linear system or transform could not be inverted.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// The nonlocal boundary value problem hit a resonance (u'(1) ~ 0).
class ResonanceError : public Error {
 public:
  using Error::Error;
};

/// The harmonic disturbance has zero amplitude (b = c = 0).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Gain design or certification failed.
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration could not be parsed or validated.
class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractError(what);
}

}  // namespace rdreg
