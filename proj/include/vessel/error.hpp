#pragma once

#include <stdexcept>
#include <string>

namespace vessel {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Raised when a parameter or input violates a precondition. `field()` names
// the offending parameter when there is one, so front ends can point at it.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message, std::string field = {})
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace vessel
