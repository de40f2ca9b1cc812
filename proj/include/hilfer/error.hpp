#pragma once

#include <stdexcept>
#include <string>

namespace hilfer {

/// Argument outside an operation's mathematical domain (poles, s >= t, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// An iterative procedure hit its iteration cap before its stopping rule fired.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs with mismatched shapes (grid vs values, solution layouts).
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A user-supplied map returned NaN or infinity.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hilfer
