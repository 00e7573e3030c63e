#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zeno {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input violated a documented precondition or type invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed (level crossing, frame drift, non-convergence).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Raised when a computation would not converge within its doubling budget.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double last_estimate)
        : NumericalError(what), last_estimate_(last_estimate) {}

    double last_estimate() const noexcept { return last_estimate_; }

private:
    double last_estimate_;
};

/// The quadrature grid under-samples the phase oscillation.
class InsufficientSampling : public NumericalError {
public:
    InsufficientSampling(const std::string& what, std::size_t required_nodes)
        : NumericalError(what), required_nodes_(required_nodes) {}

    std::size_t required_nodes() const noexcept { return required_nodes_; }

private:
    std::size_t required_nodes_;
};

} // namespace zeno
