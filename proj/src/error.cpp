#include "sispatch/error.hpp"

namespace sispatch {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonQuasiPositive: return "NonQuasiPositive";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::BadBracket: return "BadBracket";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NonPositiveDegree: return "NonPositiveDegree";
    case ErrorCode::TiePatch: return "TiePatch";
    case ErrorCode::AllGammaZero: return "AllGammaZero";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::SubThreshold: return "SubThreshold";
    case ErrorCode::LeftBox: return "LeftBox";
    case ErrorCode::InconsistentRatio: return "InconsistentRatio";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::BoxViolation: return "BoxViolation";
    case ErrorCode::DegenerateH: return "DegenerateH";
    case ErrorCode::EmptyJMinus: return "EmptyJMinus";
    case ErrorCode::ZeroGamma: return "ZeroGamma";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NegativeState: return "NegativeState";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NegativeEntry:
    case ErrorCode::NotIrreducible:
    case ErrorCode::NonPositiveDegree:
    case ErrorCode::NonQuasiPositive:
    case ErrorCode::Reducible:
    case ErrorCode::TiePatch:
    case ErrorCode::NotSymmetric:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
        return ErrorCategory::Validation;
    case ErrorCode::SubThreshold:
    case ErrorCode::AllGammaZero:
    case ErrorCode::DegenerateH:
    case ErrorCode::ZeroGamma:
    case ErrorCode::InconsistentRatio:
        return ErrorCategory::Precondition;
    default:
        return ErrorCategory::Numerical;
    }
}

} // namespace sispatch
