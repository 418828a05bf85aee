#pragma once

#include <stdexcept>
#include <string>

namespace opeid {

// Malformed input files or config.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A domain invariant does not hold (bad probabilities, non-finite values, ...).
struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

// An asserted assumption set is inconsistent with the fitted regression.
// Carries the data-driven lower bound on L so callers can surface it.
struct InfeasibleError : std::runtime_error {
  InfeasibleError(const std::string& what, double l_lower_bound)
      : std::runtime_error(what), l_lower_bound(l_lower_bound) {}
  double l_lower_bound = 0.0;
};

}  // namespace opeid
