#pragma once

#include <stdexcept>
#include <string>

namespace sparseret {

// Bad input: malformed files, invalid configuration, violated preconditions.
// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during solving or training. The CLI maps this to exit code 1.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparseret
