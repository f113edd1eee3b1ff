#pragma once

#include <stdexcept>
#include <string>

namespace qvote {

// Thrown when an operation's precondition is violated.
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Absolute tolerance used by default for state-vector comparisons.
inline constexpr double kDefaultTol = 1e-9;

// Dense statevectors only; protocol sizes here are n <= 8.
inline constexpr int kMaxQubits = 16;

}  // namespace qvote
