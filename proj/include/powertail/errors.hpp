#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace powertail {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed config files, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Base for failures of the numerics themselves (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public NumericalError {
 public:
  IntegrationFailure(const std::string& what, double drift)
      : NumericalError(what), drift_(drift) {}
  double drift() const { return drift_; }

 private:
  double drift_;
};

class NumericalOverflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PrecisionLimit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SpectralSeparationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

class FitDomainError : public Error {
 public:
  FitDomainError(const std::string& what, std::vector<double> offending)
      : Error(what), offending_(std::move(offending)) {}
  const std::vector<double>& offending_tau() const { return offending_; }

 private:
  std::vector<double> offending_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace powertail
