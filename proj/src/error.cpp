#include "wikimig/error.hpp"

namespace wikimig {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Configuration: return "ConfigurationError";
        case ErrorCode::Precondition: return "PreconditionViolation";
        case ErrorCode::AlignmentEmpty: return "AlignmentEmpty";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::NoData: return "NoData";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::DegenerateFit: return "DegenerateFit";
        case ErrorCode::SingularDesign: return "SingularDesign";
        case ErrorCode::InfeasibleConfiguration: return "InfeasibleConfiguration";
        case ErrorCode::ArticleUnavailable: return "ArticleUnavailable";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::Protocol: return "ProtocolError";
        case ErrorCode::Format: return "FormatError";
        case ErrorCode::Validation: return "ValidationError";
        case ErrorCode::Io: return "IoError";
    }
    return "UnknownError";
}

}  // namespace wikimig
