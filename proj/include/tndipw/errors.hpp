#pragma once

#include <stdexcept>
#include <string>

namespace tndipw {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public Error {
 public:
  using Error::Error;
};

class SeparationError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, int iterations, double score_norm)
      : Error(what), iterations_(iterations), score_norm_(score_norm) {}

  int iterations() const noexcept { return iterations_; }
  double score_norm() const noexcept { return score_norm_; }

 private:
  int iterations_;
  double score_norm_;
};

/// Raised when y1 is read from a record whose outcome is not observed (t = 0).
class MaskedOutcomeError : public Error {
 public:
  using Error::Error;
};

class UnknownVariableError : public Error {
 public:
  using Error::Error;
};

class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

class InsufficientStratumError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure of one stage of a multi-stage estimator. `stage()` names the stage.
class EstimationError : public Error {
 public:
  EstimationError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace tndipw
