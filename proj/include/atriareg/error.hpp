#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace atriareg {

// Failure categories. The CLI prints the category name as the first token of
// its error line, so names are part of the external interface.
enum class ErrorCode {
    ConstantIntensity,
    EmptyMask,
    MissingMasks,
    GeometryMismatch,
    TooSmall,
    NonFiniteLoss,
    NonFiniteData,
    BothEmpty,
    ConfigInvalid,
    BadMagic,
    UnsupportedDatatype,
    TruncatedFile,
    IoFailure,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &detail);

    ErrorCode code() const noexcept { return code_; }
    const std::string &detail() const noexcept { return detail_; }

  private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace atriareg
