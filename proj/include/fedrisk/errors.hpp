#pragma once

#include <stdexcept>
#include <string>

namespace fedrisk {

// Bad user-supplied configuration (dimensions, fractions, config files).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; messages name the offending byte offset.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller violated an API precondition.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fedrisk
