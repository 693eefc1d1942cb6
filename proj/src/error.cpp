#include "lefgpd/error.hpp"

namespace lefgpd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSimpleFixedPoint: return "NonSimpleFixedPoint";
    case ErrorKind::DegenerateMap: return "DegenerateMap";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::EllipticityFailure: return "EllipticityFailure";
    case ErrorKind::FrequencyBoxTooSmall: return "FrequencyBoxTooSmall";
    case ErrorKind::OutOfChart: return "OutOfChart";
    case ErrorKind::NonDecayingBoundary: return "NonDecayingBoundary";
    case ErrorKind::CrossCheckFailure: return "CrossCheckFailure";
    case ErrorKind::UnboundedLadder: return "UnboundedLadder";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

}  // namespace lefgpd
