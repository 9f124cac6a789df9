#pragma once

#include <stdexcept>
#include <string>

namespace epiline {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two inputs coincide up to scale, or a construction collapses (parallel
// pencil lines, coincident camera centers, zero-length direction).
struct DegenerateInput : Error {
  using Error::Error;
};

// A fitted line homography fails the pencil-to-pencil consistency check;
// callers are expected to discard the hypothesis.
struct PencilViolation : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct OutOfBounds : Error {
  using Error::Error;
};

struct EmptyPencil : Error {
  using Error::Error;
};

struct NoCandidates : Error {
  using Error::Error;
};

struct NoValidHypothesis : Error {
  using Error::Error;
};

// Point configuration too degenerate for a minimal solver (extra null space).
struct DegenerateConfiguration : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct MissingFile : Error {
  using Error::Error;
};

struct InsufficientPoints : Error {
  using Error::Error;
};

}  // namespace epiline
