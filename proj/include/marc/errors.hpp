#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace marc {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A direction was required from a vector whose L2 norm is below the 1e-12 floor.
// patch_index >= 0 identifies the offending patch when the vector came from a grid row.
struct ZeroNormError : Error {
  explicit ZeroNormError(const std::string& msg, std::ptrdiff_t patch = -1)
      : Error(msg), patch_index(patch) {}
  std::ptrdiff_t patch_index;
};

struct DimMismatchError : Error {
  using Error::Error;
};

struct EmptySequenceError : Error {
  using Error::Error;
};

struct EmptyBankError : Error {
  using Error::Error;
};

// A probability that must be positive underflowed to (or below) zero.
struct ZeroProbError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Filesystem-level failure: open, read, write, rename.
struct IoError : Error {
  using Error::Error;
};

// Structural failure while decoding a container file.
struct FormatError : IoError {
  using IoError::IoError;
};

struct BadMagicError : FormatError {
  using FormatError::FormatError;
};

struct VersionMismatchError : FormatError {
  using FormatError::FormatError;
};

struct TruncatedFileError : FormatError {
  using FormatError::FormatError;
};

}  // namespace marc
