#include "atriareg/error.hpp"

namespace atriareg {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ConstantIntensity: return "ConstantIntensity";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::MissingMasks: return "MissingMasks";
    case ErrorCode::GeometryMismatch: return "GeometryMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::NonFiniteData: return "NonFiniteData";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string &detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

} // namespace atriareg
