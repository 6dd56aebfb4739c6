#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sispatch {

enum class ErrorCode {
    // kernel
    NonQuasiPositive,
    Reducible,
    NoConvergence,
    Singular,
    BadBracket,
    StepUnderflow,
    NonFinite,
    // patch graph
    NegativeEntry,
    NotIrreducible,
    NonPositiveDegree,
    // reproduction
    TiePatch,
    AllGammaZero,
    NoSignChange,
    // equilibrium
    SubThreshold,
    LeftBox,
    InconsistentRatio,
    ResidualTooLarge,
    // asymptotics
    BoxViolation,
    DegenerateH,
    EmptyJMinus,
    ZeroGamma,
    NotSymmetric,
    // simulator
    NegativeState,
    // generic input problems
    InvalidArgument,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Coarse classification used for process exit codes.
enum class ErrorCategory { Validation, Numerical, Precondition };

ErrorCategory category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sispatch
