// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace leoipac {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Coincident points, parallel frame axes, or any geometry that has no
/// well-defined line of sight.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

class BelowHorizon : public Error {
public:
    using Error::Error;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Invalid configuration. `key()` names the offending field when known and
/// `line()` is the 1-based source line for parse errors (0 otherwise).
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string key = {}, int line = 0)
        : Error(what), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

} // namespace leoipac
