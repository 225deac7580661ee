#pragma once

#include <stdexcept>
#include <string>

namespace havok {

// Bad input or impossible configuration. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Something went wrong inside the numerics. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace havok
