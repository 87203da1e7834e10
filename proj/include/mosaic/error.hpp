#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mosaic {

enum class ErrorCode {
  InvalidArgument,
  SingularHomography,
  PatchOutOfBounds,
  ImageTooSmall,
  OutOfBounds,
  RegionOutOfBounds,
  InsufficientMatches,
  NoConsensus,
  TooManyLevels,
  DimensionMismatch,
  ZeroKeypoints,
  SpecInvalid,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::PatchOutOfBounds: return "PatchOutOfBounds";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::RegionOutOfBounds: return "RegionOutOfBounds";
    case ErrorCode::InsufficientMatches: return "InsufficientMatches";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::TooManyLevels: return "TooManyLevels";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroKeypoints: return "ZeroKeypoints";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mosaic
