#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcpscan/config.hpp"
#include "mcpscan/process.hpp"
#include "mcpscan/wire.hpp"

namespace mcpscan {

struct ToolDescriptor {
    std::string name;
    std::string description;
    nlohmann::json input_schema = nlohmann::json::object();

    bool operator==(const ToolDescriptor&) const = default;
};

struct ResourceDescriptor {
    std::string uri_or_name;
    std::string description;

    bool operator==(const ResourceDescriptor&) const = default;
};

struct PromptDescriptor {
    std::string name;
    std::string description;

    bool operator==(const PromptDescriptor&) const = default;
};

struct ProtocolInfo {
    std::string server_name;
    std::string server_version;
    std::string protocol_version;

    bool operator==(const ProtocolInfo&) const = default;
};

/// Everything one server advertises: tools, resources, prompts.
struct ServerFeatures {
    std::string server_name;
    std::vector<ToolDescriptor> tools;
    std::vector<ResourceDescriptor> resources;
    std::vector<PromptDescriptor> prompts;
    ProtocolInfo protocol_info;

    bool operator==(const ServerFeatures&) const = default;
};

class TimeoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EnvMode { Scrubbed, PassThrough };

struct ConnectOptions {
    std::chrono::milliseconds timeout{30000};  // whole-session budget per server
    std::chrono::milliseconds kill_grace{2000};
    EnvMode env_mode = EnvMode::Scrubbed;
    RedactionPolicy redaction;
};

/// One live connection to a spawned MCP server. Single-consumer: callers
/// serialize operations; distinct sessions are independent.
class Session {
public:
    /// Spawns the server and completes the initialize handshake. A protocol
    /// version mismatch is recorded as a warning, not a failure.
    static Session connect(const ServerSpec& spec, const ConnectOptions& options = {});

    Session(Session&&) noexcept = default;
    Session& operator=(Session&&) noexcept = default;
    ~Session();

    /// Issues tools/list, resources/list, prompts/list (with pagination).
    /// Servers that decline a category contribute an empty list. Never sends
    /// any tool-invocation or resource-read method.
    ServerFeatures enumerate_features();

    struct TerminationReport {
        bool already_closed = false;
        bool clean_exit = false;
        int exit_code = -1;
        int term_signal = 0;
        bool forced_kill = false;
        std::string stderr_excerpt;
    };

    TerminationReport close();

    bool open() const { return open_; }
    const ProtocolInfo& protocol_info() const { return protocol_info_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    const std::string& server_name() const { return spec_.name; }

private:
    Session() = default;

    WireMessage request(const std::string& method, std::optional<nlohmann::json> params);
    nlohmann::json list_category(const char* method, const char* array_key);

    ServerSpec spec_;
    std::unique_ptr<ChildProcess> child_;
    std::chrono::steady_clock::time_point deadline_{};
    std::chrono::milliseconds kill_grace_{2000};
    std::int64_t next_request_id_ = 1;
    bool open_ = false;
    ProtocolInfo protocol_info_;
    std::vector<std::string> warnings_;
    TerminationReport last_termination_;
};

}  // namespace mcpscan
