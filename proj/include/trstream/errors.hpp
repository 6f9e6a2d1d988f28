#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace trstream {

/// Contract violation on shapes, modes, ranks or indices.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-finite input reached a numerical kernel.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed TRT1 file. Carries the byte offset at which decoding failed.
class format_error : public std::runtime_error {
public:
    format_error(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Bad experiment configuration, detected before any compute starts.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace trstream
