#pragma once

#include <stdexcept>
#include <string>

namespace thzchan {

// Base class for all library errors. The CLI maps each subclass to a
// distinct exit code.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input outside a model's domain (distance below reference, |Gamma| >= 1,
// frequency outside a correction model's validity range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Too few points or too few distinct abscissae for the requested fit.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// File does not parse under any declared schema.
class FormatError : public Error {
public:
    using Error::Error;
};

// File parses but carries invalid content (duplicate keys, zero magnitude,
// non-finite values).
class DataError : public Error {
public:
    using Error::Error;
};

// Sweep grid is incomplete or the frequency step is non-uniform.
class GridError : public Error {
public:
    using Error::Error;
};

// Model file declares an unsupported format version.
class VersionError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace thzchan
