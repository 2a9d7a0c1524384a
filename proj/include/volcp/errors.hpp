#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace volcp {

// Bad user input: malformed files, invalid configuration, out-of-range flags.
// CLI maps this to exit code 2.
class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Degenerate or non-finite numerics discovered while computing.
// CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Euler scheme produced a non-finite value; carries the failing step.
class simulation_error : public numeric_error {
public:
  simulation_error(const std::string& what, std::size_t failing_index)
      : numeric_error(what), index(failing_index) {}
  std::size_t index;
};

}  // namespace volcp
