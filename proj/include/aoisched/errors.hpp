#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace aoi {

/// Base class of all errors raised by the toolkit. `code()` is a stable
/// machine-readable tag; the CLI prints it and maps the error category to a
/// process exit code (validation errors -> 2, runtime errors -> 1).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Bad inputs: malformed configs, non-stochastic matrices, dimension errors.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Failures that occur while solving or simulating well-formed inputs.
class SolveError : public Error {
 public:
  using Error::Error;
};

struct NotStochastic final : ValidationError {
  explicit NotStochastic(const std::string& w) : ValidationError("NotStochastic", w) {}
};
struct NotErgodic final : ValidationError {
  explicit NotErgodic(const std::string& w) : ValidationError("NotErgodic", w) {}
};
struct NegativeEntry final : ValidationError {
  explicit NegativeEntry(const std::string& w) : ValidationError("NegativeEntry", w) {}
};
struct DimensionMismatch final : ValidationError {
  explicit DimensionMismatch(const std::string& w) : ValidationError("DimensionMismatch", w) {}
};
struct InvalidTruncation final : ValidationError {
  explicit InvalidTruncation(const std::string& w) : ValidationError("InvalidTruncation", w) {}
};
struct ConfigError final : ValidationError {
  explicit ConfigError(const std::string& w) : ValidationError("ConfigError", w) {}
};

struct IndexOutOfRange final : SolveError {
  explicit IndexOutOfRange(const std::string& w) : SolveError("IndexOutOfRange", w) {}
};
struct SingularSystem final : SolveError {
  explicit SingularSystem(const std::string& w) : SolveError("SingularSystem", w) {}
};
struct IterationLimit final : SolveError {
  explicit IterationLimit(const std::string& w) : SolveError("IterationLimit", w) {}
};
struct InfeasiblePower final : SolveError {
  explicit InfeasiblePower(const std::string& w) : SolveError("InfeasiblePower", w) {}
};
struct TruncationTooTight final : SolveError {
  explicit TruncationTooTight(const std::string& w) : SolveError("TruncationTooTight", w) {}
};
struct NoConvergence final : SolveError {
  explicit NoConvergence(const std::string& w) : SolveError("NoConvergence", w) {}
};
struct NoBracket final : SolveError {
  explicit NoBracket(const std::string& w) : SolveError("NoBracket", w) {}
};

}  // namespace aoi
