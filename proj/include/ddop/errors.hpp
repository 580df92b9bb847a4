#pragma once

#include <stdexcept>
#include <string>

namespace ddop {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- tensor layer --------------------------------------------------------

/// Two wires were asked to contract but live on different spaces.
struct SpaceMismatch : Error {
  using Error::Error;
};

/// Two wires were asked to contract but carry the same conjugation flag.
struct FlagMismatch : Error {
  using Error::Error;
};

/// Wire lists are incompatible (comparison, permutation, reshaping).
struct ShapeMismatch : Error {
  using Error::Error;
};

// -- density layer -------------------------------------------------------

/// A mixture was given no senses at all.
struct EmptySenseList : Error {
  using Error::Error;
};

/// A mixture weight or sense probability is negative.
struct NegativeProbability : Error {
  using Error::Error;
};

/// An operator expected to be symmetric is not.
struct NonSymmetric : Error {
  using Error::Error;
};

/// An operator with zero trace cannot be normalised.
struct ZeroTrace : Error {
  using Error::Error;
};

/// An operator expected to be positive semidefinite is not.
struct NotPSD : Error {
  using Error::Error;
};

// -- grammar layer -------------------------------------------------------

/// A type string could not be parsed; `position` is the byte offset.
struct SyntaxError : Error {
  std::size_t position;
  SyntaxError(const std::string& what, std::size_t pos)
      : Error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

/// No reduction of the given sequence to the target exists.
struct NotReducible : Error {
  using Error::Error;
};

// -- semantics layer -----------------------------------------------------

/// A basic grammatical type has no assigned vector space.
struct AssignmentGap : Error {
  using Error::Error;
};

/// A word tensor does not match the layout its grammatical type demands.
struct LayoutError : Error {
  using Error::Error;
};

// -- lexicon layer -------------------------------------------------------

/// The lexicon file is not syntactically valid JSON.
struct ParseError : Error {
  using Error::Error;
};

/// The lexicon file parsed but violates the format's semantic rules.
struct ValidationError : Error {
  using Error::Error;
};

/// The file could not be read or written.
struct IoError : Error {
  using Error::Error;
};

}  // namespace ddop
