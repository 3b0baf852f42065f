#pragma once

#include <stdexcept>
#include <string>

namespace telltale {

// Base of every structured error the library raises. The CLI maps all of
// these to exit code 2 (data/format error).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or truncated file content (TTWM, PNG, JSON manifests).
class FormatError : public Error {
public:
    using Error::Error;
};

// Transformation or configuration parameter outside its validity domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Image shape or channel-count mismatch.
class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace telltale
