#pragma once

#include <stdexcept>
#include <string>

namespace cotforge {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid input data: bad records, bad configs, violated invariants.
/// Maps to CLI exit code 1.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A line of a JSON-Lines file failed to parse or validate.
class LineError : public ValidationError {
public:
    LineError(const std::string& what, std::size_t line)
        : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Filesystem failure: missing path, unwritable output.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

/// Remote backend failed after exhausting its retry budget.
/// Maps to CLI exit code 2.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int attempts, int http_status = 0)
        : Error(what), attempts_(attempts), http_status_(http_status) {}

    int attempts() const { return attempts_; }
    int http_status() const { return http_status_; }

private:
    int attempts_;
    int http_status_;
};

/// Request exceeded the configured timeout on every attempt.
class TimeoutError : public TransportError {
public:
    TimeoutError(const std::string& what, int attempts) : TransportError(what, attempts) {}
};

/// A scripted mock backend was asked for more responses than it holds.
class ScriptExhaustedError : public Error {
public:
    explicit ScriptExhaustedError(std::size_t calls)
        : Error("mock script exhausted after " + std::to_string(calls) + " calls"),
          calls_(calls) {}

    std::size_t calls() const { return calls_; }

private:
    std::size_t calls_;
};

/// The judge backend never produced a parseable VERDICT line.
class JudgeProtocolError : public Error {
public:
    explicit JudgeProtocolError(const std::string& what) : Error(what) {}
};

/// A department pool is too small to satisfy the benchmark quota.
class InsufficientPoolError : public ValidationError {
public:
    InsufficientPoolError(const std::string& department, std::size_t pool, std::size_t quota)
        : ValidationError("department " + department + " has " + std::to_string(pool) +
                          " records, fewer than quota " + std::to_string(quota)),
          department_(department) {}

    const std::string& department() const { return department_; }

private:
    std::string department_;
};

/// Per-code caps make the benchmark quota unreachable.
class InfeasibleSpecError : public ValidationError {
public:
    InfeasibleSpecError(const std::string& department, std::size_t achievable, std::size_t quota)
        : ValidationError("department " + department + " can yield at most " +
                          std::to_string(achievable) + " cases under the per-code cap, quota is " +
                          std::to_string(quota)),
          department_(department), achievable_(achievable) {}

    const std::string& department() const { return department_; }
    std::size_t achievable() const { return achievable_; }

private:
    std::string department_;
    std::size_t achievable_;
};

/// A numeric computation produced a non-finite value.
class NumericalError : public Error {
public:
    NumericalError(const std::string& term, long step = -1)
        : Error(step >= 0 ? "non-finite value in " + term + " at step " + std::to_string(step)
                          : "non-finite value in " + term),
          term_(term), step_(step) {}

    const std::string& term() const { return term_; }
    long step() const { return step_; }

private:
    std::string term_;
    long step_;
};

}  // namespace cotforge
