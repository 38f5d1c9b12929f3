#pragma once

#include <stdexcept>
#include <string>

namespace mtdiff {

/// Invalid input: malformed PMF, graph, scenario or argument. The CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure did not reach its accuracy target. The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtdiff
