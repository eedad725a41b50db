#pragma once

#include <stdexcept>
#include <string>

namespace gencom {

// Base of every exception thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (length granularity, mismatched sizes, ...).
struct ContractViolation : Error {
  using Error::Error;
};

// Malformed or truncated external data (image files, serialized payloads).
struct FormatError : Error {
  using Error::Error;
};

// File system failures.
struct IoError : Error {
  using Error::Error;
};

// A received entropy-coded payload could not be decoded. Consumed by the baseline HARQ path.
struct DecodeFailure : Error {
  using Error::Error;
};

// Invalid experiment configuration; `where` names the offending key path.
struct ConfigError : Error {
  ConfigError(std::string where_, const std::string& what)
      : Error(where_ + ": " + what), where(std::move(where_)) {}
  std::string where;
};

// Sidecar transport, protocol or timeout problems.
struct SidecarError : Error {
  using Error::Error;
};

// A quality curve never crosses the requested threshold.
struct CoverageUndefined : Error {
  using Error::Error;
};

}  // namespace gencom
