#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apfv {

// Raised when a caller violates a documented precondition (bad sizes,
// non-positive density, lambda = 0 for the classical schemes, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a linear solve cannot be completed.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what, std::ptrdiff_t pivot = -1)
        : std::runtime_error(what), pivot_(pivot) {}

    /// Index of the offending pivot, or -1 when not applicable.
    std::ptrdiff_t pivot() const noexcept { return pivot_; }

private:
    std::ptrdiff_t pivot_;
};

}  // namespace apfv
