#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uhop {

/// Every failure the library reports. The CLI prints the name verbatim in its
/// machine-readable error object, so keep the spellings stable.
enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  ZeroVector,
  BadMagic,
  TruncatedFile,
  EmptySelection,
  NonFinite,
  BisectionNoConverge,
  IndexOutOfRange,
  ZeroImage,
  SinglePattern,
  RankDeficient,
  ZeroMatrix,
  OutOfDomain,
  InvalidLogArgument,
  DegenerateRadius,
  SinglePoint,
  NotOnSimplex,
  NotPlanar,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::BisectionNoConverge: return "BisectionNoConverge";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ZeroImage: return "ZeroImage";
    case ErrorKind::SinglePattern: return "SinglePattern";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::InvalidLogArgument: return "InvalidLogArgument";
    case ErrorKind::DegenerateRadius: return "DegenerateRadius";
    case ErrorKind::SinglePoint: return "SinglePoint";
    case ErrorKind::NotOnSimplex: return "NotOnSimplex";
    case ErrorKind::NotPlanar: return "NotPlanar";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool cond, ErrorKind kind, const char* msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace detail
}  // namespace uhop
