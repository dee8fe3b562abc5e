#include "aepnp/error.hpp"

namespace aepnp {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::InvalidGroundTruth: return "InvalidGroundTruth";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::DegenerateControlPoints: return "DegenerateControlPoints";
    case ErrorCode::TooFewCorrespondences: return "TooFewCorrespondences";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::AxisCollapse: return "AxisCollapse";
    case ErrorCode::NoHypothesisFound: return "NoHypothesisFound";
    case ErrorCode::InsufficientResiduals: return "InsufficientResiduals";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InvalidScale: return "InvalidScale";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string &what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

} // namespace aepnp
