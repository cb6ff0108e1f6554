#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dpe {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's precondition (non-finite value, size mismatch, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Configuration that cannot be realized, e.g. SL tapping with inputs on the SL.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// Network with no unique solution (floating node, conflicting sources).
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Iterative solve that did not reach its tolerance. Carries whatever
/// diagnostic history the solver had at the point it gave up.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace dpe
