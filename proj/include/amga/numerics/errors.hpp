#pragma once

#include <stdexcept>
#include <string>

namespace amga {

// Exception hierarchy shared by every module. The CLI maps the three
// top-level families onto exit codes (config 2, I/O 3, numeric 4).

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class IndexError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ContractError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ParseError : public IoError {
public:
    using IoError::IoError;
};

class TrainingError : public NumericError {
public:
    using NumericError::NumericError;
};

class AttackError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace amga
