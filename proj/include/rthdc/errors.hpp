#pragma once

#include <stdexcept>
#include <string>

namespace rthdc {

// Error taxonomy shared by the library and the CLI. The CLI maps each class
// to a distinct exit code: ConfigError -> 2, PreconditionError -> 3, and
// ContractError / InternalError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration, malformed input file, or an unsupported parameter
// combination detected before any simulation work starts.
struct ConfigError : Error {
    using Error::Error;
};

// Input data that fails a documented runtime precondition, e.g. a text
// shorter than the n-gram size.
struct PreconditionError : Error {
    using Error::Error;
};

// API misuse against a documented operation contract: out-of-range location,
// bad transverse-read span, counter overflow, mode violations, and similar.
struct ContractError : Error {
    using Error::Error;
};

// A broken internal invariant, e.g. the in-memory pipeline disagreeing with
// the software reference. Always a bug, never a user error.
struct InternalError : Error {
    using Error::Error;
};

} // namespace rthdc
