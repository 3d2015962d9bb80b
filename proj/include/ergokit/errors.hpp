#pragma once

#include <stdexcept>
#include <string>

namespace ergokit {

// Bad input: dimension mismatch, violated precondition, malformed object.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// The computation itself failed: singular system, explosion, all paths censored.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ergokit
