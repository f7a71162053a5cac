#pragma once

#include <stdexcept>
#include <string>

namespace coldsqz {

// Input outside the mathematical domain of an operation (negative intensity,
// efficiency > 1, asymmetric matrix, ...). Maps to CLI exit code 1.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver its contract (bracketing failure,
// singular resolvent, truncated Fock space too small). Maps to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace coldsqz
