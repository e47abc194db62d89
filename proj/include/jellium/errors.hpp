#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jellium {

enum class ErrorCode {
    InvalidParams,
    NotIntegrable,
    BetaNotTwo,
    NOverLimit,
    CnNotPositive,
    CoincidentPoints,
    NumericalOverflow,
    LambdaBelowOne,
    SubcriticalParameters,
    NoConvergence,
    NonNormalized,
    EntropyDiverges,
    POutOfRange,
    EmptySample,
    NonFiniteValue,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Configuration/validation failures map to CLI exit code 2, numeric and
/// runtime failures to exit code 3.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace jellium
