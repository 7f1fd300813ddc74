#pragma once

#include <stdexcept>
#include <string>

namespace smilewings {

enum class ErrorKind {
  Domain,
  NoSignChange,
  MaxIterations,
  ToleranceNotReached,
  PriceBelowIntrinsic,
  PriceAtOrAboveCap,
  NotMonotone,
  DivergentWing,
  GrowthViolation,
  EmptyTail,
  NonPositiveVol,
  Unsupported,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library. `kind()` lets callers branch
/// without a catch clause per subclass.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Carries the best iterate / estimate available when an iterative method
/// stops before meeting its stopping rule.
class ConvergenceError : public Error {
 public:
  ConvergenceError(ErrorKind kind, const std::string& what, double best,
                   double error_estimate)
      : Error(kind, what), best_(best), error_estimate_(error_estimate) {}

  double best() const noexcept { return best_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_;
  double error_estimate_;
};

/// Raised when f = -d(x, I(x)) fails to increase across a grid interval.
class NotMonotoneError : public Error {
 public:
  NotMonotoneError(double x_left, double x_right, const std::string& what)
      : Error(ErrorKind::NotMonotone, what), x_left_(x_left), x_right_(x_right) {}

  double x_left() const noexcept { return x_left_; }
  double x_right() const noexcept { return x_right_; }

 private:
  double x_left_;
  double x_right_;
};

[[noreturn]] void throw_domain(const std::string& what);

}  // namespace smilewings
