#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lefgpd {

enum class ErrorKind {
  NonSimpleFixedPoint,
  DegenerateMap,
  TruncationTooSmall,
  EllipticityFailure,
  FrequencyBoxTooSmall,
  OutOfChart,
  NonDecayingBoundary,
  CrossCheckFailure,
  UnboundedLadder,
  InvalidArgument,
  SchemaViolation,
};

std::string_view to_string(ErrorKind kind);

// Every math-domain failure in the library is raised as this type so that the
// orchestration layer can turn it into a structured report entry.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lefgpd
