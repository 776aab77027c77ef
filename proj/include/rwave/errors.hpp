#pragma once

#include <stdexcept>
#include <string>

namespace rwave {

// Base of every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested more modes than the configured hard cap.
struct CapacityError : Error {
    using Error::Error;
};

// Grid cannot represent the retained span without aliasing.
struct AliasingError : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

// Operation not defined for the given family / mode combination.
struct Unsupported : Error {
    using Error::Error;
};

// A bubble or profile is not resolvable at the available cutoff.
struct ResolutionError : Error {
    ResolutionError(const std::string& what, long required_modes)
        : Error(what), required(required_modes) {}
    long required;
};

// Precondition violation on numeric arguments (inadmissible pair, t out of range, ...).
struct DomainError : Error {
    using Error::Error;
};

} // namespace rwave
