#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vsd {

enum class ErrorCode {
    Parse,
    Io,
    Validation,
    DuplicateId,
    EmptyDefinition,
    UnknownVerb,
    UnknownSense,
    DimensionMismatch,
    EmptyInput,
    NoCoverage,
    MissingKey,
    BadMagic,
    Truncated,
    ZeroNorm,
    InsufficientData,
    NonFinite,
    Numerical,
    MissingResource,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the engine carries a code so callers (and tests)
// can branch on the kind of failure instead of the message text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

    ErrorCode code() const noexcept { return code_; }
    // Message without the code prefix, for re-wrapping with more context.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace vsd
