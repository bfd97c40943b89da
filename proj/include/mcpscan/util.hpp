#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mcpscan {

// Stable 64-bit FNV-1a, used for deterministic finding ids.
std::uint64_t fnv1a64(std::string_view data);
std::string to_hex64(std::uint64_t value);

// SHA-256 of raw bytes, rendered as "sha256:<hex>".
std::string sha256_digest(std::string_view data);

std::string to_lower(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// ISO-8601 UTC timestamp, second resolution ("2025-04-01T12:00:00Z").
std::string iso8601_utc_now();

std::chrono::steady_clock::time_point deadline_after(std::chrono::milliseconds d);

// stderr logging; report payloads stay on stdout.
void log_info(const std::string& msg);
void log_warn(const std::string& msg);
void log_error(const std::string& msg);

}  // namespace mcpscan
