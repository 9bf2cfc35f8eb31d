#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tylerscale {

// Bad caller-supplied configuration (odd n in exact mode, non-integer beta*n, ...).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that the operation cannot handle, e.g. a zero column.
class DegenerateInputError : public std::invalid_argument {
 public:
  DegenerateInputError(const std::string& what, std::size_t column)
      : std::invalid_argument(what), column_(column) {}
  explicit DegenerateInputError(const std::string& what)
      : std::invalid_argument(what) {}

  // Offending column index, or npos when not column-specific.
  std::size_t column() const { return column_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t column_ = npos;
};

// Numerical breakdown: ill-conditioned Gram matrix, step-size underflow.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the mathematical structure of the input failed
// (e.g. the Cheeger routine requires a doubly balanced frame).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace tylerscale
