#pragma once

#include <stdexcept>
#include <string>

namespace affscope {

// Malformed input data: corpus lines, cache records, pattern files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated an operation precondition (bad count, bad range, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace affscope
