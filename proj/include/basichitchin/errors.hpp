#pragma once

#include <stdexcept>
#include <string>

namespace bh {

enum class ErrorCode {
  InvalidGluing,
  GenusMismatch,
  InvalidConfig,
  DegreeOutOfRange,
  DegreeMismatch,
  RankMismatch,
  NotUnitary,
  NotSkew,
  NonConvergence,
  NaNDetected,
  NewtonStall,
  GapTooSmall,
  CGDivergence,
  FixedPointDivergence,
  AssemblyOverflow,
  IOError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidGluing: return "InvalidGluing";
    case ErrorCode::GenusMismatch: return "GenusMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorCode::DegreeMismatch: return "DegreeMismatch";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::NotSkew: return "NotSkew";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NaNDetected: return "NaNDetected";
    case ErrorCode::NewtonStall: return "NewtonStall";
    case ErrorCode::GapTooSmall: return "GapTooSmall";
    case ErrorCode::CGDivergence: return "CGDivergence";
    case ErrorCode::FixedPointDivergence: return "FixedPointDivergence";
    case ErrorCode::AssemblyOverflow: return "AssemblyOverflow";
    case ErrorCode::IOError: return "IOError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bh
