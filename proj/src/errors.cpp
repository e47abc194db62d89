#include <jellium/errors.hpp>

namespace jellium {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotIntegrable: return "NotIntegrable";
    case ErrorCode::BetaNotTwo: return "BetaNotTwo";
    case ErrorCode::NOverLimit: return "NOverLimit";
    case ErrorCode::CnNotPositive: return "CnNotPositive";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::NumericalOverflow: return "NumericalOverflow";
    case ErrorCode::LambdaBelowOne: return "LambdaBelowOne";
    case ErrorCode::SubcriticalParameters: return "SubcriticalParameters";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonNormalized: return "NonNormalized";
    case ErrorCode::EntropyDiverges: return "EntropyDiverges";
    case ErrorCode::POutOfRange: return "POutOfRange";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::NumericalOverflow:
    case ErrorCode::NoConvergence:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::Io:
        return false;
    default:
        return true;
    }
}

}  // namespace jellium
