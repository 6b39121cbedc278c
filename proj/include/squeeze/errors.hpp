#pragma once

#include <stdexcept>
#include <string>

namespace squeeze {

/// Base of every error raised by the library. `exit_code()` is the CLI exit
/// status the error maps to.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Bad argument or configuration value.
class InvalidArgument : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Mean spin too short to define a direction.
class DegenerateDirection : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Fock-space truncation is too small for the requested evolution.
class CutoffOverflow : public Error {
public:
    CutoffOverflow(const std::string& what, int required_n_max)
        : Error(what), required_n_max_(required_n_max) {}
    int exit_code() const noexcept override { return 3; }
    int required_n_max() const noexcept { return required_n_max_; }

private:
    int required_n_max_;
};

/// Integrator failed its norm or step-halving checks.
class StepSizeError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Motion did not return to the ground state at the end of a gate.
class OpenLoopError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Problem size beyond what the brute-force routines accept.
class ResourceError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

}  // namespace squeeze
