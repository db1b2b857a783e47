#pragma once

#include <stdexcept>
#include <string>

namespace aura {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed data, violated preconditions or bad configuration. The CLI maps
/// this to exit status 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

}  // namespace aura
