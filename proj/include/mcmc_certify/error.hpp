#pragma once

#include <stdexcept>
#include <string>

namespace certify {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or type invariant was violated by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative method ran out of budget. Carries the best estimate reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double partial)
        : Error(what), partial_(partial) {}

    double partial() const noexcept { return partial_; }

private:
    double partial_;
};

}  // namespace certify
