#pragma once

#include <stdexcept>
#include <string>

namespace betgame {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A stated precondition of an operation does not hold.
struct PreconditionError : Error {
  using Error::Error;
};

// A guarantee that should follow from satisfied preconditions failed;
// signals a bug in parameters or in the implementation, never user input.
struct InvariantViolation : Error {
  using Error::Error;
};

// Malformed bet request against a betting strategy.
struct BetError : Error {
  enum class Reason { UnknownNode, NotALeaf, PositionRestricted, MassMismatch, NegativeMass };
  Reason reason;
  BetError(Reason r, const std::string& what) : Error(what), reason(r) {}
};

// A position falls outside the declared universe.
struct UniverseError : Error {
  long long offending;
  UniverseError(long long pos, const std::string& what) : Error(what), offending(pos) {}
};

struct ParseError : Error {
  using Error::Error;
};

} // namespace betgame
