#pragma once

#include <stdexcept>
#include <string>

namespace mgsim {

// Bad input: out-of-range parameters, malformed graphs, bad scenario fields.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Newton iteration on the load buses ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace mgsim
