#pragma once

#include <stdexcept>
#include <string>

namespace smreg {

// Precondition on an argument of a numerical routine was violated.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent user configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A stochastic model produced an impossible draw (e.g. a non-positive
// inter-arrival time).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computation was refused because an input did not meet its contract
// (non-converged renewal profile, unknown true signal, ...).
class RefusalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File system failure. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace smreg
