#include "mdim/error.hpp"

namespace mdim {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidHorizon: return "invalid-horizon";
    case ErrorKind::InvariantViolation: return "invariant-violation";
    case ErrorKind::UnsupportedDirection: return "unsupported-direction";
    case ErrorKind::IncompatibleSignal: return "incompatible-signal";
    case ErrorKind::WindowExhausted: return "window-exhausted";
    case ErrorKind::Band: return "band";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::NotAnEmbeddingImage: return "not-an-embedding-image";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::SearchFailure: return "search-failure";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace mdim
