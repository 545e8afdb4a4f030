#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace regimeval {

inline constexpr const char* kVersion = "0.1.0";

// Bad inputs, bad configs, malformed files. Maps to CLI exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Failures during an otherwise valid run (I/O mid-run, provider faults,
// numeric blowups). Maps to CLI exit code 2.
struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a, 64-bit. Used for content addressing and feature hashing; stable
// across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

// Hex digest of raw text; the cache/file-provider key space.
std::string content_hash(std::string_view text);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// Canonical double formatting for CSV output: %.17g round-trips exactly.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace regimeval
