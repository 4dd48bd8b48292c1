#pragma once

#include <stdexcept>
#include <string>

namespace hk {

// Error categories exposed 1:1 through the C API status codes.
enum class ErrorCode {
    InvalidArgument,
    ShapeMismatch,
    ParseError,
    IoError,
    EmptyMask,
    InvalidDepth,
    BehindCamera,
    RangeError,
    ConsistencyError,
    DegenerateInput,
    GenerationError,
    ValidationError,
    EvaluationError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace hk
