#pragma once

#include <stdexcept>
#include <string>

namespace dalloy {

inline constexpr char kVersion[] = "0.1.0";

// Every failure the library can produce is one of these kinds; the CLI maps
// each kind to a distinct nonzero exit code.
enum class ErrorKind {
  Validation,          // bad config / parameter values supplied by the caller
  Capacity,            // problem size over a hard cap
  HypothesisViolation, // a theorem's hypothesis does not hold for the inputs
  UnsupportedNorm,     // norm undefined for this density kind
  ShiftCollision,      // LDL^T pivot hit a near-zero (shift at an eigenvalue)
  NumericalDegeneracy, // retries exhausted / iteration failed to converge
  NonInvertibleSymbol, // symbol vanishes or kernel series does not converge
  Io,                  // file read/write problems
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::HypothesisViolation: return "hypothesis-violation";
    case ErrorKind::UnsupportedNorm: return "unsupported-norm";
    case ErrorKind::ShiftCollision: return "shift-collision";
    case ErrorKind::NumericalDegeneracy: return "numerical-degeneracy";
    case ErrorKind::NonInvertibleSymbol: return "non-invertible-symbol";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

// Exit-code map used by the CLI; 0 = success, 1 = an assertion/pass flag failed.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::HypothesisViolation: return 3;
    case ErrorKind::UnsupportedNorm: return 3;
    case ErrorKind::NonInvertibleSymbol: return 3;
    case ErrorKind::ShiftCollision: return 4;
    case ErrorKind::NumericalDegeneracy: return 4;
    case ErrorKind::Capacity: return 5;
    case ErrorKind::Io: return 6;
  }
  return 7;
}

}  // namespace dalloy
