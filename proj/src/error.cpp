#include "triode/error.hpp"

namespace triode {

const char *to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::HypothesisViolation: return "hypothesis-violation";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::InvalidProfile: return "invalid-profile";
    case ErrorKind::InsufficientTail: return "insufficient-tail";
    case ErrorKind::DegenerateField: return "degenerate-field";
    case ErrorKind::StructureViolation: return "structure-violation";
    case ErrorKind::ScaleLimit: return "scale-limit";
    case ErrorKind::CertificateViolation: return "certificate-violation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace triode
