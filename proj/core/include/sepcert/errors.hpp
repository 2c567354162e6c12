#pragma once

#include <stdexcept>
#include <string>

namespace sepcert {

/// Base class for all input-contract violations raised by the library.
///
/// Mathematical outcomes (infeasible certificate, search exhaustion, budget
/// limits) are never exceptions; they are encoded in result types so that the
/// caller always receives the computed bounds.  Exceptions are reserved for
/// malformed inputs.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A weight or matrix entry required to be nonnegative is negative.
class NegativeWeightError : public Error {
public:
  using Error::Error;
};

/// A state declared normalized has weights that do not sum to one.
class BadNormalizationError : public Error {
public:
  using Error::Error;
};

/// An index pair lies outside the valid range for the given dimension.
class BadIndexError : public Error {
public:
  using Error::Error;
};

/// A witness-lift subset is malformed (wrong size, duplicates, out of range).
class BadSubsetError : public Error {
public:
  using Error::Error;
};

/// Two operands have incompatible dimensions.
class DimensionMismatchError : public Error {
public:
  using Error::Error;
};

/// A rank-restricted factorization was requested for a matrix whose
/// numerical rank exceeds the supported bound.
class RankTooHighError : public Error {
public:
  using Error::Error;
};

/// The matrix is not doubly nonnegative (PSD with nonnegative entries),
/// violating a factorization precondition.
class NotDnnError : public Error {
public:
  using Error::Error;
};

/// A vector required to be nonzero is identically zero.
class AllZeroError : public Error {
public:
  using Error::Error;
};

/// A scalar or structural parameter is outside its documented domain.
class BadParamError : public Error {
public:
  using Error::Error;
};

/// A bipartition cut index is outside the valid range.
class BadCutError : public Error {
public:
  using Error::Error;
};

}  // namespace sepcert
