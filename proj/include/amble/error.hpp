#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amble {

/// Machine-readable failure categories. The CLI prints `error: <code>: <message>`
/// and the HTTP service maps the request-level ones to 400 responses.
enum class ErrorCode {
    InvalidArgument,
    OutOfBounds,
    DegenerateBox,
    GraphTooSmall,
    NoScoredScenes,
    DegenerateField,
    InsufficientCells,
    RankDeficient,
    FingerprintMismatch,
    Parse,
    Io,
    Internal,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::OutOfBounds: return "OUT_OF_BBOX";
    case ErrorCode::DegenerateBox: return "DEGENERATE_BBOX";
    case ErrorCode::GraphTooSmall: return "GRAPH_TOO_SMALL";
    case ErrorCode::NoScoredScenes: return "NO_SCORED_SCENES";
    case ErrorCode::DegenerateField: return "DEGENERATE_FIELD";
    case ErrorCode::InsufficientCells: return "INSUFFICIENT_CELLS";
    case ErrorCode::RankDeficient: return "RANK_DEFICIENT";
    case ErrorCode::FingerprintMismatch: return "FINGERPRINT_MISMATCH";
    case ErrorCode::Parse: return "PARSE_ERROR";
    case ErrorCode::Io: return "IO_ERROR";
    case ErrorCode::Internal: return "INTERNAL";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace amble
