#pragma once

#include <stdexcept>
#include <string>

namespace becprobe {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid or incomplete configuration (bad units, missing keys, violated invariants).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a kernel.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Quadrature could not meet its tolerance. Carries the best available answer.
class QuadratureError : public Error {
public:
  QuadratureError(const std::string& what, double best_value, double error_estimate)
      : Error(what), best_value_(best_value), error_estimate_(error_estimate) {}

  double best_value() const noexcept { return best_value_; }
  double error_estimate() const noexcept { return error_estimate_; }

private:
  double best_value_;
  double error_estimate_;
};

/// The decay rate is still negative at the end of the search window.
class HorizonError : public Error {
public:
  HorizonError(const std::string& what, double horizon) : Error(what), horizon_(horizon) {}
  double horizon() const noexcept { return horizon_; }

private:
  double horizon_;
};

/// A critical-point bracket does not straddle the crossover.
class BracketError : public Error {
public:
  BracketError(const std::string& what, double measure_lo, double measure_hi)
      : Error(what), measure_lo_(measure_lo), measure_hi_(measure_hi) {}
  double measure_lo() const noexcept { return measure_lo_; }
  double measure_hi() const noexcept { return measure_hi_; }

private:
  double measure_lo_;
  double measure_hi_;
};

/// Every row of a sweep failed.
class SweepError : public Error {
public:
  using Error::Error;
};

} // namespace becprobe
