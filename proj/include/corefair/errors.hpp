#pragma once

#include <stdexcept>
#include <string>

namespace corefair {

/// Process exit codes used by the command-line front end. Library code never
/// calls exit(); it throws one of the exceptions below, each of which carries
/// its code.
enum class ExitCode : int {
  ok = 0,
  failure = 1,
  validation = 2,
  size_cap = 3,
  convergence = 4,
  infeasible = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& kind, const std::string& what)
      : std::runtime_error(what), code_(code), kind_(kind) {}

  ExitCode code() const noexcept { return code_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ExitCode code_;
  std::string kind_;
};

/// Malformed input: negative utilities, shape mismatch, bad indices, bad
/// parameters.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ExitCode::validation, "validation", what) {}
};

/// An operation was asked of a constraint family it does not support.
class UnsupportedConstraintError : public Error {
 public:
  explicit UnsupportedConstraintError(const std::string& what)
      : Error(ExitCode::validation, "unsupported_constraint", what) {}
};

/// Smooth Nash welfare with ell = 0 evaluated where an agent has no utility.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ExitCode::validation, "domain", what) {}
};

/// Exhaustive search refused because the instance exceeds a size cap.
class SizeCapError : public Error {
 public:
  SizeCapError(const std::string& cap, double limit, double actual)
      : Error(ExitCode::size_cap, "size_cap",
              "size cap '" + cap + "' exceeded: limit " + fmt(limit) +
                  ", requested " + fmt(actual)),
        cap_(cap),
        limit_(limit),
        actual_(actual) {}

  const std::string& cap() const noexcept { return cap_; }
  double limit() const noexcept { return limit_; }
  double actual() const noexcept { return actual_; }

 private:
  static std::string fmt(double v) {
    std::string s = std::to_string(v);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  std::string cap_;
  double limit_;
  double actual_;
};

/// An iterative method hit its iteration cap. For the local searches this
/// can only mean an arithmetic bug; for the fractional solver it means the
/// certificate was not reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_value)
      : Error(ExitCode::convergence, "convergence", what),
        last_value_(last_value) {}

  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

/// No feasible point: an infeasible LP, or rounding that kept violating the
/// packing constraints.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double failure_fraction = 1.0)
      : Error(ExitCode::infeasible, "infeasible", what),
        failure_fraction_(failure_fraction) {}

  double failure_fraction() const noexcept { return failure_fraction_; }

 private:
  double failure_fraction_;
};

}  // namespace corefair
