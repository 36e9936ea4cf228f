#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rpcls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A matrix that must be invertible (or of full column rank) is not, to working precision.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// The instance is degenerate for the requested quantity (e.g. a zero denominator).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// An iterative method hit its iteration cap. Carries the last (or best) iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, int iterations)
        : Error(what), last_iterate_(std::move(last_iterate)), iterations_(iterations) {}

    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
    int iterations() const noexcept { return iterations_; }

private:
    Eigen::VectorXd last_iterate_;
    int iterations_;
};

}  // namespace rpcls
