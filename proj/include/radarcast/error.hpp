#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radarcast {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-parsable class name used by the CLI error line.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
    virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_argument"; }
};

class ShapeMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
    const char* kind() const noexcept override { return "shape_mismatch"; }
};

class NonFiniteInput : public InvalidArgument {
public:
    NonFiniteInput(const std::string& message, std::size_t offending)
        : InvalidArgument(message), offending_(offending) {}
    const char* kind() const noexcept override { return "non_finite_input"; }
    std::size_t offending_count() const noexcept { return offending_; }

private:
    std::size_t offending_;
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config_invalid"; }
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io_error"; }
};

class FormatError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "format_error"; }
};

class BadMagic : public FormatError {
public:
    using FormatError::FormatError;
    const char* kind() const noexcept override { return "bad_magic"; }
};

class TruncatedFile : public FormatError {
public:
    using FormatError::FormatError;
    const char* kind() const noexcept override { return "truncated"; }
};

class VersionMismatch : public FormatError {
public:
    using FormatError::FormatError;
    const char* kind() const noexcept override { return "version_mismatch"; }
};

class CheckpointMismatch : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "checkpoint_mismatch"; }
};

class TrainingDiverged : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "training_diverged"; }
};

}  // namespace radarcast
