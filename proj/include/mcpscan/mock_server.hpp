#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcpscan/client.hpp"

namespace mcpscan {

/// Environment variable naming the MethodLog side-channel file.
inline constexpr const char* kMethodLogEnvVar = "MCPSCAN_METHOD_LOG";

/// Scripted fault behaviors for protocol tests.
struct MockScript {
    enum class Kind { None, Silence, Malformed, Delay };
    Kind kind = Kind::None;
    std::chrono::milliseconds delay{0};    // Delay: sleep before every reply
    std::size_t page_size = 0;             // >0: paginate listings
    std::string protocol_version_override; // non-empty: claim this version
};

/// A hermetic server fixture: descriptor lists served verbatim, every
/// received method recorded, no side effects beyond the MethodLog file.
struct MockProfile {
    std::string profile_name;
    std::string server_info_name;
    std::string server_info_version;
    std::vector<ToolDescriptor> tools;
    std::vector<ResourceDescriptor> resources;
    std::vector<PromptDescriptor> prompts;
};

std::vector<std::string> mock_profile_names();

/// Loads one of the stock profiles (filesystem, slack, everything, chroma).
/// Throws std::invalid_argument for unknown names.
MockProfile load_mock_profile(const std::string& name);

/// Append-only log of every method received during one session.
struct MethodLogEntry {
    std::string method;
    std::int64_t ts_ms = 0;
};

/// Reads a MethodLog file written by serve_mock.
std::vector<MethodLogEntry> read_method_log(const std::string& path);

/// Serves MCP over the given streams until EOF. Answers initialize and the
/// three listing methods; unknown methods get method-not-found errors and
/// are still logged. Writes the MethodLog to method_log_path (empty: taken
/// from MCPSCAN_METHOD_LOG) on exit. Returns the process exit code.
int serve_mock(const MockProfile& profile, std::istream& in, std::ostream& out,
               const MockScript& script = {}, std::string method_log_path = "");

}  // namespace mcpscan
