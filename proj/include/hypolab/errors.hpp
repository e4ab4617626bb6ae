#pragma once
#include <stdexcept>
#include <string>

namespace hypolab {

// Thrown when operand shapes (dimension, degree, grid size) disagree.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an enumeration would exceed its configured budget.
// `count` is the number of items that would have been generated.
struct BudgetError : std::runtime_error {
  unsigned long long count;
  BudgetError(const std::string& what, unsigned long long n)
      : std::runtime_error(what), count(n) {}
};

// Thrown by the integrator when the state norm passes the blow-up guard.
struct BlowUpError : std::runtime_error {
  std::size_t step;
  BlowUpError(const std::string& what, std::size_t s)
      : std::runtime_error(what), step(s) {}
};

// Thrown on ill-conditioned linear algebra (Jacobian inversion, PSD check).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed or semantically invalid configuration input.
// line/col are 1-based; 0 means "not tied to a location".
struct ConfigError : std::runtime_error {
  int line, col;
  ConfigError(const std::string& what, int l = 0, int c = 0)
      : std::runtime_error(what), line(l), col(c) {}
};

}  // namespace hypolab
