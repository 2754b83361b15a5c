#pragma once

#include <stdexcept>
#include <string>

namespace scylla {

// Machine-readable error codes surfaced by the CLI as JSON on stderr.
enum class ErrorCode {
    UnknownFieldCode,
    WidthMismatch,
    SchemaMismatch,
    UniverseTooLarge,
    MalformedJson,
    SchemaViolation,
    UnknownActionCode,
    NotFound,
    IoFailure,
    DeviceMismatch,
    UnknownDevice,
    DanglingInterface,
    PathLengthExceeded,
    UnknownIntentType,
    BadExpression,
    EmptyInitialSet,
    StartPointUnresolved,
    NotComposite,
    UnsupportedRewrite,
    WorkerCrashed,
    InvalidSpec,
    DivisionByZero,
    InvalidConfig,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownFieldCode: return "UnknownFieldCode";
        case ErrorCode::WidthMismatch: return "WidthMismatch";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::UniverseTooLarge: return "UniverseTooLarge";
        case ErrorCode::MalformedJson: return "MalformedJson";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::UnknownActionCode: return "UnknownActionCode";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::DeviceMismatch: return "DeviceMismatch";
        case ErrorCode::UnknownDevice: return "UnknownDevice";
        case ErrorCode::DanglingInterface: return "DanglingInterface";
        case ErrorCode::PathLengthExceeded: return "PathLengthExceeded";
        case ErrorCode::UnknownIntentType: return "UnknownIntentType";
        case ErrorCode::BadExpression: return "BadExpression";
        case ErrorCode::EmptyInitialSet: return "EmptyInitialSet";
        case ErrorCode::StartPointUnresolved: return "StartPointUnresolved";
        case ErrorCode::NotComposite: return "NotComposite";
        case ErrorCode::UnsupportedRewrite: return "UnsupportedRewrite";
        case ErrorCode::WorkerCrashed: return "WorkerCrashed";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          message_(std::move(message)) {}

    ErrorCode code() const { return code_; }
    const std::string& message() const { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace scylla
