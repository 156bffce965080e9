#ifndef FIRMFACTS_ERRORS_HPP
#define FIRMFACTS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace firmfacts {

/// Base of every error raised by the library. `code()` is a short stable
/// token used as the machine-parsable prefix on the command line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct ParameterDomainError : Error {
  explicit ParameterDomainError(const std::string& w) : Error("E_PARAM", w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("E_DOMAIN", w) {}
};

/// Quadrature, root finding or optimisation failed to reach its target.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& w, double achieved = 0.0)
      : Error("E_NUMERICAL", w), achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

struct UndefinedMomentError : Error {
  explicit UndefinedMomentError(const std::string& w) : Error("E_MOMENT", w) {}
};

struct DegenerateSampleError : Error {
  explicit DegenerateSampleError(const std::string& w) : Error("E_DEGENERATE", w) {}
};

/// A year or bin has zero dispersion; `group()` names it.
class DegenerateGroupError : public Error {
 public:
  DegenerateGroupError(const std::string& kind, long long group)
      : Error("E_DEGENERATE_GROUP",
              "degenerate " + kind + " " + std::to_string(group) + ": zero dispersion"),
        group_(group) {}
  long long group() const noexcept { return group_; }

 private:
  long long group_;
};

struct UnsupportedMethodError : Error {
  explicit UnsupportedMethodError(const std::string& w) : Error("E_UNSUPPORTED", w) {}
};

struct SampleSizeError : Error {
  explicit SampleSizeError(const std::string& w) : Error("E_SAMPLE_SIZE", w) {}
};

struct CoverageError : Error {
  explicit CoverageError(const std::string& w) : Error("E_COVERAGE", w) {}
};

struct CalibrationError : Error {
  explicit CalibrationError(const std::string& w) : Error("E_CALIBRATION", w) {}
};

struct ZeroDenominatorError : Error {
  explicit ZeroDenominatorError(const std::string& w) : Error("E_ZERO_DENOMINATOR", w) {}
};

struct UndefinedGrowthError : Error {
  explicit UndefinedGrowthError(const std::string& w) : Error("E_UNDEFINED_GROWTH", w) {}
};

/// Malformed input file; `line()` is 1-based, 0 when not line specific.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& w, std::size_t line = 0)
      : Error("E_SCHEMA", line ? "line " + std::to_string(line) + ": " + w : w),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("E_CONFIG", w) {}
};

/// A named fit failed; wraps the family name around the cause.
struct FitError : Error {
  explicit FitError(const std::string& w) : Error("E_FIT", w) {}
};

}  // namespace firmfacts

#endif  // FIRMFACTS_ERRORS_HPP
