#pragma once

#include <stdexcept>
#include <string>

namespace qcml {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
        : Error(what), row_(row), column_(column) {}

    // 1-based; 0 when the error is not tied to a cell.
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class DegenerateGroundState : public Error {
public:
    using Error::Error;
};

class DegenerateBatch : public Error {
public:
    using Error::Error;
};

class EstimationFailed : public Error {
public:
    using Error::Error;
};

}  // namespace qcml
