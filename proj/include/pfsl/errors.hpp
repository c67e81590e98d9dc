#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pfsl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument / out-of-range model input.
struct DomainError : Error {
    using Error::Error;
};

// Singular or degenerate linear system (floating node, zero denominator).
struct SingularError : Error {
    using Error::Error;
};

// Iterative solver failed to converge; carries the residual history.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, std::vector<double> residuals)
        : Error(msg), residual_history(std::move(residuals)) {}
    std::vector<double> residual_history;
};

// Network synthesis found no positive-element solution; carries the residuals.
struct SynthesisError : Error {
    SynthesisError(const std::string& msg, double res_in, double res_d)
        : Error(msg), residual_omega_in(res_in), residual_omega_d(res_d) {}
    double residual_omega_in = 0.0;
    double residual_omega_d = 0.0;
};

// A power sweep produced no bifurcation crossing.
struct NoBifurcationError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, int line, int column)
        : Error(msg), line(line), column(column) {}
    int line = 0;
    int column = 0;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace pfsl
