#pragma once

#include <stdexcept>
#include <string>

namespace hv3d {

// Base of every error the library throws. The CLI maps each subclass onto a
// distinct process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration: bad flags, unsupported block size, bad
// distortion parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File missing, truncated, or malformed (raw video, depth, manifest, CSV).
class IngestError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation's precondition (dimension mismatch etc.).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Numerical failure during calibration or evaluation.
class ComputeError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace detail
}  // namespace hv3d
