#pragma once

#include <stdexcept>
#include <string>

namespace mdim {

enum class ErrorKind {
  InvalidArgument,
  InvalidHorizon,
  InvariantViolation,
  UnsupportedDirection,
  IncompatibleSignal,
  WindowExhausted,
  Band,
  Truncation,
  NotAnEmbeddingImage,
  Precondition,
  SearchFailure,
  Numerical,
  Configuration,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mdim
