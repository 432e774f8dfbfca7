// errors.hpp — Exception hierarchy shared by all modules

#pragma once

#include <stdexcept>
#include <string>

namespace strongdecoh {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// invalid user input (maps to CLI exit code 2)
struct ConfigError : Error {
    using Error::Error;
};

// argument outside the domain of a function
struct DomainError : Error {
    using Error::Error;
};

// model violates structural preconditions (commutation, conditions on theta, partition)
struct ModelError : Error {
    using Error::Error;
};

// quadrature / ODE / eigen failure (maps to CLI exit code 3)
struct NumericalError : Error {
    using Error::Error;
};

struct NonDecayingKernelError : NumericalError {
    using NumericalError::NumericalError;
};

struct NonErgodicError : Error {
    NonErgodicError(const std::string& what, int kernel_dim)
        : Error(what), kernel_dimension(kernel_dim) {}
    int kernel_dimension;
};

struct UnsupportedModeError : Error {
    using Error::Error;
};

} // namespace strongdecoh
