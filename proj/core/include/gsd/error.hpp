#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gsd {

enum class ErrorKind {
    Dimension,
    Domain,
    Parse,
    InvalidGraph,
    EmptyGraph,
    DisconnectedGraph,
    MetricNotPsd,
    InfeasibleNoiseGraph,
    NoRegion,
    Convergence,
    OptimizerStalled,
    Usage,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every exception thrown by the library. The kind drives the CLI
/// exit code; `stage` is filled in by the pipeline when an error crosses a
/// stage boundary.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    ErrorKind kind_;
    std::string stage_;
};

class DimensionError : public Error {
public:
    DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
        : Error(ErrorKind::Dimension, what + " (expected " + std::to_string(expected) +
                                          ", got " + std::to_string(actual) + ")"),
          expected_(expected), actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(ErrorKind::Parse, what + " at row " + std::to_string(row) +
                                      ", column " + std::to_string(column)),
          row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class EmptyGraphError : public Error {
public:
    EmptyGraphError(const std::string& what, double smallest_distance)
        : Error(ErrorKind::EmptyGraph, what), smallest_distance_(smallest_distance) {}

    double smallest_distance() const noexcept { return smallest_distance_; }

private:
    double smallest_distance_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(ErrorKind::Convergence, what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Thrown by the exit-code mapper and anything else that needs to classify
/// an exception. 0 success, 1 usage/config, 2 data, 3 numerical.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace gsd
