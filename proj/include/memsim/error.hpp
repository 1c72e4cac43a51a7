#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace memsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config

class ConfigError : public Error {
public:
    using Error::Error;
};

class NoSuchPreset : public ConfigError {
public:
    explicit NoSuchPreset(const std::string& name)
        : ConfigError("no such preset: '" + name + "'"), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class ParseError : public ConfigError {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : ConfigError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": " + what),
          line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class MissingKeyError : public ConfigError {
public:
    MissingKeyError(const std::string& key, const std::string& symbol)
        : ConfigError("missing required key '" + key + "' (" + symbol + ")"), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct Violation {
    std::string field;
    std::string constraint;
};

class ValidationError : public ConfigError {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

// ---------------------------------------------------------------- numerics

class InvalidGridError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

/// Iterative solver ran out of iterations.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

class SingularJacobianError : public Error {
public:
    using Error::Error;
};

/// Field, barrier or exponent outside the range the device equations hold in.
class NonPhysicalError : public Error {
public:
    using Error::Error;
};

class TimestepError : public Error {
public:
    using Error::Error;
};

/// Solver failure inside a transient run, annotated with where it happened.
class SimulationError : public Error {
public:
    SimulationError(std::size_t step, double time, const std::string& cause)
        : Error("step " + std::to_string(step) + " (t = " + std::to_string(time) +
                " s): " + cause),
          step_(step), time_(time) {}
    std::size_t step() const { return step_; }
    double time() const { return time_; }

private:
    std::size_t step_;
    double time_;
};

// ---------------------------------------------------------------- analysis / io

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class UndefinedThdError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace memsim
