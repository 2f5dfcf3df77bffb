#pragma once

#include <stdexcept>
#include <string>

namespace acgan {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// process exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument or precondition violation: bad shape, out-of-range label, invalid config value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss, gradient or tensor value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed file: bad magic, truncation, inconsistent header.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// An input artifact does not belong with the others: wrong manifest tag,
/// classifier fingerprint differs from the one a report was made with, ...
class ArtifactMismatch : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& what) { throw InvalidArgument(what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace acgan
