#pragma once

#include <stdexcept>
#include <string>

namespace csa {

// Base for everything thrown by this library. The CLI maps subtrees of
// this hierarchy onto exit codes (1 usage, 2 data, 3 numerical).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : Error {
    using Error::Error;
};

// Bad or missing input data.
struct DataError : Error {
    using Error::Error;
};
struct ParseError : DataError {
    using DataError::DataError;
};
struct EmptyInput : DataError {
    using DataError::DataError;
};
struct SchemaError : DataError {
    using DataError::DataError;
};
struct TopologyError : DataError {
    using DataError::DataError;
};
struct EmptyCorpus : DataError {
    using DataError::DataError;
};
struct EmptyDataset : DataError {
    using DataError::DataError;
};
struct EmptyMask : DataError {
    using DataError::DataError;
};
struct CorruptCheckpoint : DataError {
    using DataError::DataError;
};

// Numerical and contract failures.
struct NumericError : Error {
    using Error::Error;
};
struct NaNLoss : NumericError {
    using NumericError::NumericError;
};
struct ConvergenceError : NumericError {
    using NumericError::NumericError;
};

// API misuse; indicates a caller bug rather than bad data.
struct LogicError : Error {
    using Error::Error;
};
struct ShapeError : LogicError {
    using LogicError::LogicError;
};
struct IndexError : LogicError {
    using LogicError::LogicError;
};
struct RangeError : LogicError {
    using LogicError::LogicError;
};
struct NotScalar : LogicError {
    using LogicError::LogicError;
};
struct OddDim : LogicError {
    using LogicError::LogicError;
};
struct ConfigError : LogicError {
    using LogicError::LogicError;
};
struct PrefixTooLong : LogicError {
    using LogicError::LogicError;
};

} // namespace csa
