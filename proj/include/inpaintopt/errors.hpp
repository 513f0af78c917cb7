#pragma once

#include <stdexcept>
#include <string>

namespace inpaintopt {

// Bad input: wrong dimensions, out-of-range parameters, malformed files.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed: singular systems, non-convergence, lost convexity.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace inpaintopt
