#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coherent {

enum class ErrorCode : std::uint8_t {
    InvalidArgument,
    ZeroProbabilityEvent,
    ZeroProbabilitySignal,
    NonPositiveOutput,
    DegenerateDistortion,
    MarginalityViolation,
    SignalSpaceTooLarge,
    StateSpaceTooLarge,
    NoConvergence,
    Configuration,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ZeroProbabilityEvent: return "ZeroProbabilityEvent";
        case ErrorCode::ZeroProbabilitySignal: return "ZeroProbabilitySignal";
        case ErrorCode::NonPositiveOutput: return "NonPositiveOutput";
        case ErrorCode::DegenerateDistortion: return "DegenerateDistortion";
        case ErrorCode::MarginalityViolation: return "MarginalityViolation";
        case ErrorCode::SignalSpaceTooLarge: return "SignalSpaceTooLarge";
        case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::Configuration: return "Configuration";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) throw Error(code, msg);
}

}  // namespace coherent
