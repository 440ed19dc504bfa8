#pragma once

#include <stdexcept>
#include <string>

namespace sanvi {

/// An iterative solver stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear system or factorization was (numerically) singular.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sanvi
