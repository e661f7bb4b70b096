#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sdeu {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class InvalidLevel : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateHistory : public Error {
public:
    using Error::Error;
};

class FitFailed : public Error {
public:
    using Error::Error;
};

/// Malformed input. Framing errors carry the byte offset where decoding stopped.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what) {}
    FormatError(const std::string& what, std::uint64_t byte_offset)
        : Error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(static_cast<std::int64_t>(byte_offset)) {}

    /// -1 when the error is not tied to a position.
    [[nodiscard]] std::int64_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::int64_t byte_offset_ = -1;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raised when an integration step leaves the finite (and bounded) state space.
class NonFiniteState : public Error {
public:
    NonFiniteState(const std::string& what, std::int64_t step)
        : Error(what + (step >= 0 ? " at step " + std::to_string(step) : std::string{})),
          step_(step) {}

    /// Step index within the simulated window, or -1 when raised by a bare step.
    [[nodiscard]] std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

}  // namespace sdeu
