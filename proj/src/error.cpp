#include "harvestkit/error.hpp"

namespace hk {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::InvalidDepth: return "InvalidDepth";
        case ErrorCode::BehindCamera: return "BehindCamera";
        case ErrorCode::RangeError: return "RangeError";
        case ErrorCode::ConsistencyError: return "ConsistencyError";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::GenerationError: return "GenerationError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::EvaluationError: return "EvaluationError";
    }
    return "UnknownError";
}

}  // namespace hk
