#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedcast {

/**
 * @brief Base class for every error raised by this library.
 *
 * Callers that do not care about the precise failure can catch this one
 * type; everything below is a refinement used to map failures onto
 * distinct process exit codes and targeted recovery paths.
 */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration file or parameter set failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A structural spec (window shape, model architecture, synthetic recipe, ...)
/// is internally inconsistent.
class InvalidSpec : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Two objects that must share a shape or layout do not.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Resampling to a grid finer than a channel's native spacing was requested.
class UpsampleUnsupported : public Error {
public:
    using Error::Error;
};

/// A channel id was referenced that is not present in the input set.
class UnknownChannel : public Error {
public:
    using Error::Error;
};

/// A chronological split would leave a required partition empty.
class SplitTooSmall : public Error {
public:
    using Error::Error;
};

/// Two rows carry the same (timestamp, channel) key.
class DuplicateKey : public Error {
public:
    using Error::Error;
};

/// A CSV row could not be parsed; carries the 1-based line number.
class MalformedRow : public Error {
public:
    MalformedRow(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A quantile level lies outside the open interval (0, 1).
class InvalidQuantile : public InvalidSpec {
public:
    using InvalidSpec::InvalidSpec;
};

/// Gradient-based training was requested for a model with no parameters.
class NotTrainable : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss or parameter; carries the epoch and
/// batch index (both 0-based) at which the blow-up was detected.
class Diverged : public Error {
public:
    Diverged(int epoch, int batch)
        : Error("training diverged at epoch " + std::to_string(epoch) +
                ", batch " + std::to_string(batch)),
          epoch_(epoch), batch_(batch) {}

    int epoch() const noexcept { return epoch_; }
    int batch() const noexcept { return batch_; }

private:
    int epoch_;
    int batch_;
};

/// An aggregation round received no client updates.
class NoParticipants : public Error {
public:
    using Error::Error;
};

/// A normalized metric is undefined because the normalizer is not positive.
class UndefinedNormalization : public Error {
public:
    using Error::Error;
};

/// A psychrometric input lies outside the physically meaningful domain.
class NonPhysical : public Error {
public:
    using Error::Error;
};

/// A series is too short for the requested seasonal analysis.
class SeriesTooShort : public Error {
public:
    using Error::Error;
};

/// Correlation is undefined because at least one input is constant.
class UndefinedCorrelation : public Error {
public:
    using Error::Error;
};

}  // namespace fedcast
