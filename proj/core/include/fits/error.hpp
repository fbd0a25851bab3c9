#pragma once

#include <stdexcept>
#include <string>

namespace fits {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Odd or zero transform length, odd output length.
class InvalidLength : public Error {
public:
    using Error::Error;
};

/// NaN or infinite input where finite values are required.
class InvalidValue : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. The message names the offending row/column.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Training diverged (NaN/inf loss) or a numeric routine failed.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace fits
