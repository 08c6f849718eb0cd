#pragma once

#include <stdexcept>
#include <string>

namespace mdual {

// Bad arguments or inconsistent data supplied by the caller.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation not available for this kind of input.
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Root finder failed; `trace` holds one line per iteration.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, std::string trace_)
        : std::runtime_error(what), trace(std::move(trace_)) {}
    std::string trace;
};

// A matching condition whose B(a) sets are not nested.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solver invariant broken.
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mdual
