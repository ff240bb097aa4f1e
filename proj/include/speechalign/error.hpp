#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace speechalign {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable, missing or malformed input data.
class InputError : public Error {
public:
    using Error::Error;
};

// Malformed line in a text input; carries the 1-based line number.
class ParseError : public InputError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
public:
    using Error::Error;
};

// An internal consistency check failed.
class InvariantError : public Error {
public:
    using Error::Error;
};

}  // namespace speechalign
