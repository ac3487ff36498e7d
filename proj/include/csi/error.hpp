#pragma once

#include <stdexcept>
#include <string>

namespace csi {

// Base class for all library errors. Subclasses map onto the CLI exit
// codes: usage errors are handled by the argument parser, data/format
// errors exit with 2, training failures with 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file header, bad magic, unparseable field.
class FormatError : public Error {
public:
    using Error::Error;
};

// Dimension mismatch between related objects (row width, vector length).
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid configuration value or combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Index outside the representable range (e.g. quantizer index >= 2^L).
class RangeError : public Error {
public:
    using Error::Error;
};

// A selection (subcarrier mask, ...) retained nothing.
class EmptySelectionError : public Error {
public:
    using Error::Error;
};

// An operation produced no output where at least one item is required.
class EmptyResultError : public Error {
public:
    using Error::Error;
};

// Not enough data points for the requested statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// A classifier was asked to fit data containing a single class.
class DegenerateLabelsError : public Error {
public:
    using Error::Error;
};

// Optimization diverged; carries the epoch at which it happened.
class TrainingError : public Error {
public:
    TrainingError(const std::string& msg, std::size_t epoch)
        : Error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace csi
