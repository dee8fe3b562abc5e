#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aepnp {

enum class ErrorCode {
    NonPositiveDepth,
    InvalidGroundTruth,
    DegenerateMatrix,
    DegenerateControlPoints,
    TooFewCorrespondences,
    RankDeficient,
    AxisCollapse,
    NoHypothesisFound,
    InsufficientResiduals,
    NumericalFailure,
    PlacementFailure,
    ParseError,
    ValidationError,
    InvalidScale,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what);

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace aepnp
