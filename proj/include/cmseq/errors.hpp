#pragma once

#include <stdexcept>
#include <string>

namespace cmseq {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix/block shapes or index ranges do not line up, or a matrix that
/// must be symmetric is not.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A symmetric factorization failed; the input is not positive definite.
/// For model covariances this signals a singular or invalid Gaussian model.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// Conditioning/index sets passed to the independence oracle overlap.
class IndexOverlap : public Error {
public:
    using Error::Error;
};

/// Model parameters violate the reciprocal coupling identity.
class NotReciprocal : public Error {
public:
    using Error::Error;
};

/// Boundary parameters do not select a Markov member of the model class.
class BoundaryNotMarkov : public Error {
public:
    using Error::Error;
};

/// A required parameter block (or the whole boundary) is missing.
class IncompleteParameters : public Error {
public:
    using Error::Error;
};

/// Malformed input file (bad JSON, missing or mistyped field).
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace cmseq
