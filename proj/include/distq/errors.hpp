#pragma once

#include <stdexcept>
#include <string>

namespace distq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector or matrix shapes that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A parameter outside its documented domain (K < 1, bits out of range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be used (empty test set, non-finite entries, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A codebook that violates its structural invariants.
class InvalidCodebook : public Error {
public:
    using Error::Error;
};

/// A wire frame or payload that does not decode.
class MalformedFrame : public Error {
public:
    using Error::Error;
};

/// A configuration or model file with bad content (schema, constraints).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace distq
