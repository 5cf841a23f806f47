#pragma once

#include <stdexcept>
#include <string>

namespace nnscore {

/// Malformed on-disk data (bad magic, truncation, unparseable CSV).
class FormatError : public std::runtime_error {
public:
    FormatError(std::string message, std::size_t byte_offset)
        : std::runtime_error(message + " (at byte " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}
    explicit FormatError(const std::string& message) : std::runtime_error(message), offset_(0) {}

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Structurally valid input holding unusable values (NaN/Inf entries).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad spec fields, unknown config keys).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nnscore
