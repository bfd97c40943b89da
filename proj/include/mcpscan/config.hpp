#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mcpscan {

/// One declared MCP server: the launch command plus its environment.
struct ServerSpec {
    std::string name;
    std::string command;
    std::vector<std::string> args;
    std::map<std::string, std::string> env;
    // Unknown keys of the entry, preserved verbatim for round-tripping.
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    bool operator==(const ServerSpec&) const = default;
};

struct ScanConfig {
    std::vector<ServerSpec> servers;  // declaration order of the source file
    std::string source_digest;        // sha256 of the raw config text
};

struct RedactionPolicy {
    // Case-insensitive substring match against env variable names.
    std::vector<std::string> secret_name_patterns = {"KEY", "TOKEN", "SECRET", "PASSWORD",
                                                     "CREDENTIAL"};
    std::string replacement = "***";
};

class ConfigError : public std::runtime_error {
public:
    enum class Kind { Parse, Structure, Validation };

    ConfigError(Kind kind, const std::string& msg, int line = -1, int column = -1)
        : std::runtime_error(msg), kind(kind), line(line), column(column) {}

    Kind kind;
    int line;
    int column;
};

// Parses the Claude Desktop config dialect: a top-level "mcpServers" object
// whose entries carry required "command" and "args" and an optional "env".
ScanConfig parse_config(std::string_view text);

ScanConfig load_config_file(const std::filesystem::path& path);

// Canonical serialization; parse(serialize(c)) is structurally identical to c.
std::string serialize_config(const ScanConfig& config);

bool is_secret_name(std::string_view env_name, const RedactionPolicy& policy);

// Masks every env value whose variable name matches a secret pattern.
// Total and idempotent; name/command/args are never changed.
ScanConfig redact(ScanConfig config, const RedactionPolicy& policy = {});

}  // namespace mcpscan
