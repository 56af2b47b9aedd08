#pragma once

#include <stdexcept>
#include <string>

namespace pursuit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested too close to a pole of the Gamma function.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Circulant embedding produced an eigenvalue below the clipping tolerance.
class NegativeEigenvalue : public Error {
 public:
  NegativeEigenvalue(double min_value, std::size_t embedding)
      : Error("circulant embedding of length " + std::to_string(embedding) +
              " has negative eigenvalue " + std::to_string(min_value)),
        min_value_(min_value) {}

  double min_value() const noexcept { return min_value_; }

 private:
  double min_value_;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// Path batches that must share a grid (or batch size) do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration; `field` names the offending key, `line` is 1-based
/// (0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& message)
      : Error(format(field, line, message)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, int line, const std::string& message) {
    std::string out = field.empty() ? std::string("config") : field;
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out + ": " + message;
  }

  std::string field_;
  int line_;
};

/// I/O failure on an artifact or input file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pursuit
