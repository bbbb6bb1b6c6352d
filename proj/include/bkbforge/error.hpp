#pragma once

#include <stdexcept>
#include <string>

namespace bkbforge {

// Exit codes used by the CLI; each error type maps onto one of them.
enum class ExitCode : int {
  kOk = 0,
  kInput = 2,
  kCapacity = 3,
  kCannotEncode = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode code() const noexcept = 0;
};

// Malformed files, unknown variables/states, missing values, bad arguments.
class InputError : public Error {
 public:
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::kInput; }
};

// A request that would exceed a configured enumeration or solver limit.
class CapacityError : public Error {
 public:
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::kCapacity; }
};

// A model assigns zero probability to a world it is asked to encode.
class CannotEncodeError : public Error {
 public:
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::kCannotEncode; }
};

}  // namespace bkbforge
