#pragma once

#include <stdexcept>
#include <string>

namespace kacgraze {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// An argument or state outside the documented domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// A numerical procedure could not reach its stated accuracy.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

// An experiment refused to run because its input fails a hypothesis check.
class PreconditionGateError : public Error {
public:
  using Error::Error;
};

// An experiment ran but its asserted property did not hold.
class ToleranceError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace detail
}  // namespace kacgraze
