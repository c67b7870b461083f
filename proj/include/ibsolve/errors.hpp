// Error types shared across the library.
#ifndef IBSOLVE_ERRORS_HPP
#define IBSOLVE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ibsolve {

// Requested target lies outside the achievable region of the problem.
struct InfeasibleTarget : std::runtime_error {
    explicit InfeasibleTarget(const std::string& msg) : std::runtime_error(msg) {}
};

// A kernel evaluation produced a non-finite value or a root could not be
// resolved to tolerance.
struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; message carries line/field context.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ibsolve

#endif  // IBSOLVE_ERRORS_HPP
