// errors.hpp - exception hierarchy shared by all wgmqed modules

#pragma once

#include <stdexcept>
#include <string>

namespace wgm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Zero vectors, zero amplitudes and similar inputs with no defined direction.
struct DegenerateInputError : Error {
    using Error::Error;
};

// Physical model does not apply (e.g. atom closer than the usable distance).
struct OutOfModelError : Error {
    using Error::Error;
};

struct CapacityError : Error {
    using Error::Error;
};

// Inputs that are individually valid but mutually inconsistent.
struct ConsistencyError : Error {
    using Error::Error;
};

struct SolverError : Error {
    using Error::Error;
};

struct NonUniqueSteadyStateError : SolverError {
    using SolverError::SolverError;
};

struct ConvergenceError : SolverError {
    using SolverError::SolverError;
};

struct StiffnessError : SolverError {
    using SolverError::SolverError;
};

struct FitError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace wgm
