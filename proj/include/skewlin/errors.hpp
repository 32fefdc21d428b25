#pragma once

#include <stdexcept>
#include <string>

namespace skewlin {

/// Rejected input or configuration: the run cannot start. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// The iteration failed to contract. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A model invariant was violated at run time (fiber escaped [0,1],
/// globalized multiplier reached 1, shifted argument left the fiber, ...).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace skewlin
