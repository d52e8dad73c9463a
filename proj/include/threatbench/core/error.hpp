#pragma once

#include <stdexcept>
#include <string>

namespace threatbench {

/// Base of every error the toolkit raises. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed, inconsistent or insufficient data (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Non-finite values during training or scoring (exit code 4).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace threatbench
