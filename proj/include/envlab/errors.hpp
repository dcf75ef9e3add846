#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace envlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested conjugate slope lies outside the asymptotic slope range, so
/// the supremum defining the transform is +infinity.
class UnboundedTransformError : public Error {
 public:
  using Error::Error;
};

/// No affine minorant with an admissible slope exists.
class NoEnvelopeError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Quadrature did not reach the requested tolerance.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& what, double estimate, double error_estimate)
      : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}
  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

class InvalidCoverError : public Error {
 public:
  using Error::Error;
};

/// The outer weight fails to dominate the inner weight on the gluing annulus.
class GluingFailureError : public Error {
 public:
  GluingFailureError(const std::string& what, std::size_t tau_index, std::size_t s_index,
                     double margin)
      : Error(what), tau_index_(tau_index), s_index_(s_index), margin_(margin) {}
  std::size_t tau_index() const noexcept { return tau_index_; }
  std::size_t s_index() const noexcept { return s_index_; }
  double margin() const noexcept { return margin_; }

 private:
  std::size_t tau_index_;
  std::size_t s_index_;
  double margin_;
};

/// Wraps a failure inside a multi-stage pipeline with the name of the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace envlab
