#pragma once

#include <stdexcept>
#include <string>

namespace qlab {

// Invalid arguments or grid preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative method ran out of iterations or a factorization failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Newton/root iteration that did not converge; carries the last iterate.
template <class Iterate>
class NoConvergence : public NumericalError {
 public:
  NoConvergence(const std::string& what, Iterate last)
      : NumericalError(what), last_(std::move(last)) {}
  const Iterate& last_iterate() const { return last_; }

 private:
  Iterate last_;
};

// A structural assumption of the bifurcation analysis is violated
// (transversality, non-resonance, solvability).
class HypothesisFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Time integration produced non-finite values.
class BlowUp : public NumericalError {
 public:
  BlowUp(const std::string& what, long step, double t)
      : NumericalError(what), step_(step), t_(t) {}
  long step() const { return step_; }
  double time() const { return t_; }

 private:
  long step_;
  double t_;
};

// Malformed checkpoint or data file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration errors carry the offending line number (0 if not applicable).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace qlab
