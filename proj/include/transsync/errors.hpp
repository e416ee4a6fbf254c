#pragma once

#include <stdexcept>
#include <string>

namespace transsync {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition or type invariant was violated (wrong dimensions, bad
// arguments, malformed data).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// An operation required an invertible matrix but the input was singular or
// ill-conditioned. Carries the condition number estimate that triggered it.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

// A pairwise transform set is missing entries that the operation requires.
class IncompleteSetError : public Error {
public:
    using Error::Error;
};

// Too few common points to determine an alignment.
class UnderDeterminedError : public Error {
public:
    using Error::Error;
};

// A numerically degenerate input or result (coincident points, no usable
// gauge block).
class DegenerateError : public Error {
public:
    using Error::Error;
};

// A randomised draw could not satisfy its feasibility constraint within the
// retry budget.
class InfeasibleDrawError : public Error {
public:
    using Error::Error;
};

}  // namespace transsync
