#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace cce {

using NodeId = int;
using InfosetId = int;
using PlayerId = int;

inline constexpr int kNone = -1;
inline constexpr PlayerId kChance = -1;
inline constexpr int kAnyAction = -1;
inline constexpr int kMaxPlayers = 8;

/// Probability tolerances shared by validation and the equivalence checks.
inline constexpr double kValidationTol = 1e-12;
inline constexpr double kEquivalenceTol = 1e-9;
inline constexpr double kZeroTol = 1e-12;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by any operation whose argument violates its documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace cce
