#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wikimig {

enum class ErrorCode {
    Configuration,
    Precondition,
    AlignmentEmpty,
    InsufficientData,
    InsufficientHistory,
    NoData,
    Degenerate,
    DegenerateFit,
    SingularDesign,
    InfeasibleConfiguration,
    ArticleUnavailable,
    RateLimited,
    Protocol,
    Format,
    Validation,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the toolkit carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace wikimig
