#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mindless {

/// Bad argument to a pure operation (non-finite gain, ratio out of range, ...).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not allowed in the current state (activate while active, ...).
class StateError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Malformed or unsupported input data. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnsupportedFormat : public DataError {
public:
  using DataError::DataError;
};

class DegenerateInput : public DataError {
public:
  using DataError::DataError;
};

class InsufficientData : public DataError {
public:
  using DataError::DataError;
};

/// Wire or log decode failure; carries the byte offset where parsing gave up.
class DecodeError : public DataError {
public:
  DecodeError(std::size_t offset, std::string reason)
      : DataError("decode error at offset " + std::to_string(offset) + ": " + reason),
        offset_(offset), reason_(std::move(reason)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::size_t offset_;
  std::string reason_;
};

} // namespace mindless
