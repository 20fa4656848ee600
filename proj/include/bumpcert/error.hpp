#pragma once

#include <stdexcept>
#include <string>

namespace bumpcert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A constructor or operation received a parameter outside its admissible set.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A function was evaluated outside the region where it is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An index or depth request overflows the lattice.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A structural invariant (kernel bound, Carleson normalization, ...) is violated.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed experiment configuration or command line.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace bumpcert
