#pragma once

#include <stdexcept>
#include <string>

namespace phasehom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value or module precondition that can be checked before any work starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidDirection : public Error {
public:
    using Error::Error;
};

/// Raised when a direction has no rational rotation (no finite M_nu exists).
class LatticeIncompatible : public Error {
public:
    using Error::Error;
};

/// The grid does not resolve the transition layer (h > epsilon / 4).
class ResolutionError : public Error {
public:
    using Error::Error;
};

class GeometryMismatch : public Error {
public:
    using Error::Error;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

/// A non-finite energy was produced during minimization.
class NumericalDivergence : public Error {
public:
    explicit NumericalDivergence(const std::string& what, long iteration = -1)
        : Error(what), iteration_(iteration) {}
    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

}  // namespace phasehom
