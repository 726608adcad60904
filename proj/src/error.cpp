#include "vulnprop/error.hpp"

namespace vulnprop {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::DanglingIndex: return "DanglingIndex";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotTwoNode: return "NotTwoNode";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::TooManyNodes: return "TooManyNodes";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersion: return "SchemaVersion";
  }
  return "Unknown";
}

}  // namespace vulnprop
