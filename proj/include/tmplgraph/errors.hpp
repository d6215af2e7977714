#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tmplgraph {

/// Base of every error raised by the library. The three subclasses map onto
/// the CLI exit codes (usage = 1, data = 2, numeric = 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class ConstantColumn : public DataError {
public:
    explicit ConstantColumn(std::size_t column)
        : DataError("column " + std::to_string(column) + " has zero variance"), column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class TooFewTimepoints : public DataError {
public:
    explicit TooFewTimepoints(std::size_t t)
        : DataError("need at least 3 timepoints, got " + std::to_string(t)) {}
};

class IndexOutOfRange : public DataError {
public:
    using DataError::DataError;
};

class GroupTooSmall : public DataError {
public:
    using DataError::DataError;
};

class InvalidSpec : public UsageError {
public:
    using UsageError::UsageError;
};

class TooLarge : public UsageError {
public:
    using UsageError::UsageError;
};

class EmptyTargets : public UsageError {
public:
    EmptyTargets() : UsageError("solve_entry needs at least one target") {}
};

class StaleCache : public Error {
public:
    using Error::Error;
};

class SingleClassSlice : public DataError {
public:
    using DataError::DataError;
};

class NonFinite : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace tmplgraph
