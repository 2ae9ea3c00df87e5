#pragma once

#include <stdexcept>
#include <string>

namespace rarefuse {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)) {}
};

/// Too few (or degenerate) failure samples to fit a biasing density.
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

/// Covariance matrix is singular or too ill-conditioned for the KKT solve.
/// Callers should fall back to diagonal (inverse-variance) fusion.
class SingularCovariance : public Error {
public:
    using Error::Error;
};

class UndefinedCv : public Error {
public:
    UndefinedCv() : Error("undefined CV: estimate is zero") {}
};

class ModelError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace rarefuse
