#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pwl {

enum class ErrorCode {
    NonMonotoneBreakpoints,
    BranchCountMismatch,
    ClosureCountMismatch,
    DuplicateLabel,
    NonFiniteParameter,
    NonFiniteInput,
    NonFiniteState,
    InvalidArgument,
    Diverged,
    UnknownSymbol,
    NoReturn,
    DivergedFromInterval,
    PieceLimitExceeded,
    InvalidLorenzMap,
    NotLorenz,
    NotReducible,
    NotCircle,
    NotGap,
    HitOrigin,
    InvalidParams,
    OffsetsWouldArise,
    S2MismatchesS1,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can name the failing module error.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pwl
