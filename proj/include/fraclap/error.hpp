#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands live on incompatible grids, or a grid of the wrong dimension.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical self-check (aliasing, tail estimate) exceeded its tolerance.
class PrecisionError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace fraclap
