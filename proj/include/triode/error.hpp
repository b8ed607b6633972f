#pragma once

#include <stdexcept>
#include <string>

namespace triode {

enum class ErrorKind {
  InvalidInput,
  InvalidConfig,
  HypothesisViolation,
  NonConvergence,
  InvalidProfile,
  InsufficientTail,
  DegenerateField,
  StructureViolation,
  ScaleLimit,
  CertificateViolation,
  Io,
};

const char *to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` lets callers branch on the
/// failure class without a hierarchy of subclasses.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace triode
