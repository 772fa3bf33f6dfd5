#pragma once

#include <stdexcept>
#include <string>

namespace tamed {

/// Base of every error raised by the library. Each subclass maps to one
/// CLI exit code (see docs/cli.md).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid too coarse for the requested mode set or product degree.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Coefficient model or noise map violates one of the standing hypotheses.
/// `clause()` names the violated hypothesis, e.g. "sigma-bound".
class AssumptionViolation : public Error {
public:
    AssumptionViolation(std::string clause, const std::string& what)
        : Error(what), clause_(std::move(clause)) {}
    const std::string& clause() const noexcept { return clause_; }

private:
    std::string clause_;
};

/// Non-finite or runaway field detected during time stepping.
class BlowUpError : public Error {
public:
    BlowUpError(double time, double h0, double h1, const std::string& what)
        : Error(what), time_(time), h0_(h0), h1_(h1) {}
    double time() const noexcept { return time_; }
    double h0() const noexcept { return h0_; }
    double h1() const noexcept { return h1_; }

private:
    double time_;
    double h0_;
    double h1_;
};

/// Structured-text configuration could not be parsed or is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Two fields built on different mode sets were combined.
class ModeSetMismatch : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Precondition violated by a caller (bad cutoff, mean-zero violation, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace tamed
