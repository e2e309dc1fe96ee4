#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace klpath {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidModulus : public Error {
 public:
  using Error::Error;
};

class NotInvertible : public Error {
 public:
  explicit NotInvertible(std::string what, std::size_t index = 0)
      : Error(std::move(what)), index_(index) {}

  // Position of the offending entry for batch operations, 0 otherwise.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class NotCoprime : public Error {
 public:
  using Error::Error;
};

class PrecisionUnsupported : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class UnsupportedRegime : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class PatternCollision : public Error {
 public:
  using Error::Error;
};

}  // namespace klpath
