#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlsort {

// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, broken invariants on inputs, malformed configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A key that cannot take part in an ordering (NaN, +-inf).
class KeyError : public ValidationError {
 public:
  KeyError(std::size_t index, const std::string& what)
      : ValidationError(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// An internal consistency check failed (e.g. output not sorted).
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlsort
