#include "vsd/error.hpp"

namespace vsd {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Validation: return "validation error";
    case ErrorCode::DuplicateId: return "duplicate id";
    case ErrorCode::EmptyDefinition: return "empty definition";
    case ErrorCode::UnknownVerb: return "unknown verb";
    case ErrorCode::UnknownSense: return "unknown sense";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::EmptyInput: return "empty input";
    case ErrorCode::NoCoverage: return "no coverage";
    case ErrorCode::MissingKey: return "missing key";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::ZeroNorm: return "zero norm";
    case ErrorCode::InsufficientData: return "insufficient data";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::Numerical: return "numerical failure";
    case ErrorCode::MissingResource: return "missing resource";
    }
    return "error";
}

}  // namespace vsd
