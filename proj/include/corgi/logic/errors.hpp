#pragma once

#include <stdexcept>
#include <string>

namespace corgi {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace logic {

class SyntaxError : public Error {
public:
    SyntaxError(int line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

    int line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    int line_;
    std::string reason_;
};

/// A comparison or arithmetic builtin saw an unbound variable.
class InstantiationError : public Error {
public:
    using Error::Error;
};

/// Arithmetic over something that is not a number.
class TypeError : public Error {
public:
    using Error::Error;
};

}  // namespace logic
}  // namespace corgi
