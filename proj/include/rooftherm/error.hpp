// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rooftherm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Value outside a lookup table. Carries the offending value.
class OutOfRangeError : public Error {
public:
    OutOfRangeError(const std::string& what, double value) : Error(what), value_(value) {}
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Malformed text input. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Spectral curve does not span the requested band.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Regression design has no spread in the regressor.
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

/// Pruning would leave too few observations.
class RefusalError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Missing key in a material or instrument table.
class LookupError : public Error {
public:
    using Error::Error;
};

class OutOfExtentError : public Error {
public:
    using Error::Error;
};

/// Sampling window contains only nodata.
class NodataError : public Error {
public:
    using Error::Error;
};

/// Field reading lies outside every supplied raster.
class UnmatchedTargetError : public Error {
public:
    using Error::Error;
};

} // namespace rooftherm
