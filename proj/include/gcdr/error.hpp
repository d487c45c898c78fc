#ifndef GCDR_ERROR_HPP
#define GCDR_ERROR_HPP

#include <stdexcept>
#include <string>

/**
 * @file error.hpp
 *
 * @brief Exception hierarchy shared by all modules.
 *
 * The CLI maps each category onto an exit code, so every throw site picks the
 * narrowest category that describes the failure.
 */

namespace gcdr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition (shape mismatch, wrong tag, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// A user-facing parameter is out of its valid range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// The data itself cannot support the requested computation.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

/// Row of a distance matrix with no distinct neighbor.
class DegenerateRowError : public DataError {
public:
    DegenerateRowError(std::size_t row, const std::string& what)
        : DataError(what), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Node with zero outgoing kernel mass under a row-normalized prior.
class IsolatedNodeError : public DataError {
public:
    IsolatedNodeError(std::size_t node, const std::string& what)
        : DataError(what), node_(node) {}
    std::size_t node() const { return node_; }

private:
    std::size_t node_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// Optimizer hit NaN or could not find a finite step.
class DivergenceError : public NumericalError {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : NumericalError(what), iteration_(iteration) {}
    std::size_t iteration() const { return iteration_; }

private:
    std::size_t iteration_;
};

} // namespace gcdr

#endif
