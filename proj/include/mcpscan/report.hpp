#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mcpscan/client.hpp"
#include "mcpscan/rules.hpp"

namespace mcpscan {

inline constexpr int kReportSchemaVersion = 1;

enum class ScanMode { Offline, Agentic };

std::string to_string(ScanMode mode);
ScanMode scan_mode_from_string(const std::string& s);

struct ServerSummary {
    std::string name;
    ProtocolInfo protocol_info;
    std::size_t tool_count = 0;
    std::size_t resource_count = 0;
    std::size_t prompt_count = 0;
    std::vector<std::string> warnings;

    bool operator==(const ServerSummary&) const = default;
};

/// Consolidated scan result. Timestamps are injected by the caller so
/// rendering stays pure and byte-stable.
struct ScanReport {
    std::string created_at;
    std::string config_digest;
    ScanMode mode = ScanMode::Offline;
    std::vector<ServerSummary> servers;
    std::vector<Finding> findings;  // sorted by (severity desc, finding_id)
    std::vector<std::string> degraded_warnings;

    bool operator==(const ScanReport&) const = default;
};

std::string render_markdown(const ScanReport& report);

/// Canonical machine-readable document; parse_report_json(render_json(r)) == r.
std::string render_json(const ScanReport& report);

ScanReport parse_report_json(std::string_view text);

/// The shipped report schema (data/report_schema.json), embedded.
std::string report_schema_json();

}  // namespace mcpscan
