#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adjustkit {

enum class ErrorCode {
    NegativeMass,
    NotNormalized,
    ShapeMismatch,
    TooLarge,
    UnknownVariable,
    InvalidQuery,
    ZeroCondition,
    ParseError,
    PositivityViolation,
    EmptyDataset,
    OutOfRange,
    InsufficientSamples,
    CandidateSetTooLarge,
    ParamRange,
    Usage,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NegativeMass: return "NEGATIVE_MASS";
    case ErrorCode::NotNormalized: return "NOT_NORMALIZED";
    case ErrorCode::ShapeMismatch: return "SHAPE_MISMATCH";
    case ErrorCode::TooLarge: return "TOO_LARGE";
    case ErrorCode::UnknownVariable: return "UNKNOWN_VARIABLE";
    case ErrorCode::InvalidQuery: return "INVALID_QUERY";
    case ErrorCode::ZeroCondition: return "ZERO_CONDITION";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::PositivityViolation: return "POSITIVITY_VIOLATION";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::InsufficientSamples: return "INSUFFICIENT_SAMPLES";
    case ErrorCode::CandidateSetTooLarge: return "CANDIDATE_SET_TOO_LARGE";
    case ErrorCode::ParamRange: return "PARAM_RANGE";
    case ErrorCode::Usage: return "USAGE";
    case ErrorCode::Io: return "IO_ERROR";
    }
    return "UNKNOWN";
}

/// Every failure in the library is reported through this exception; the code
/// is stable and is what the CLI prints in its error object.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when an empirical test is handed fewer rows than its budget.
class InsufficientSamples : public Error {
public:
    InsufficientSamples(std::size_t required, std::size_t available)
        : Error(ErrorCode::InsufficientSamples,
                "need " + std::to_string(required) + " samples, have " +
                    std::to_string(available)),
          required_(required), available_(available) {}

    std::size_t required() const noexcept { return required_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t required_;
    std::size_t available_;
};

}  // namespace adjustkit
