#pragma once

#include <stdexcept>
#include <string>

namespace grou {

// Exit codes used by the command-line front end.
enum class ExitCode : int { Ok = 0, Numeric = 1, Validation = 2, Io = 3 };

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual ExitCode exit_code() const noexcept { return ExitCode::Numeric; }
};

class DimensionError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::Validation; }
};

class NumericError : public Error {
public:
    using Error::Error;
};

// Raised when a closed-form estimator cannot be evaluated because the
// quadratic-variation matrix is singular (edgeless graph, degenerate path).
class IdentifiabilityError : public NumericError {
public:
    using NumericError::NumericError;
};

class OptimizerError : public NumericError {
public:
    using NumericError::NumericError;
};

class ContractViolation : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::Validation; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::Validation; }
};

class IoError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::Io; }
};

}  // namespace grou
