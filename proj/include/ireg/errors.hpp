#pragma once

#include <stdexcept>
#include <string>

namespace ireg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct NonSymmetric : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    using Error::Error;
};

// Singular input where an exact inverse was requested (no ridge fallback).
struct Singular : Error {
    using Error::Error;
};

struct RankTooLarge : Error {
    using Error::Error;
};

// An oracle estimator was requested without ground truth attached.
struct MissingOracle : Error {
    using Error::Error;
};

struct BadArgument : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

// A dataset too small for the requested split or fit.
struct TooFewRows : Error {
    using Error::Error;
};

}  // namespace ireg
