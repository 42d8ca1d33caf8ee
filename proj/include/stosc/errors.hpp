#pragma once

#include <stdexcept>
#include <string>

namespace stosc {

/// Input rejected by a type or config invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation called outside its domain (singular Lambda, non-positive step, ...).
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stosc
