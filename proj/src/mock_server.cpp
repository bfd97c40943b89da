#include "mcpscan/mock_server.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include "mcpscan/embedded_data.hpp"
#include "mcpscan/wire.hpp"

namespace mcpscan {

using nlohmann::json;

namespace {

MockProfile profile_from_json(const json& doc) {
    MockProfile profile;
    profile.profile_name = doc.at("name").get<std::string>();
    profile.server_info_name = doc.at("server_info").at("name").get<std::string>();
    profile.server_info_version = doc.at("server_info").at("version").get<std::string>();
    for (const auto& t : doc.at("tools")) {
        ToolDescriptor tool;
        tool.name = t.at("name").get<std::string>();
        tool.description = t.value("description", std::string());
        tool.input_schema = t.value("inputSchema", json::object());
        profile.tools.push_back(std::move(tool));
    }
    for (const auto& r : doc.value("resources", json::array())) {
        profile.resources.push_back(
            {r.at("name").get<std::string>(), r.value("description", std::string())});
    }
    for (const auto& p : doc.value("prompts", json::array())) {
        profile.prompts.push_back(
            {p.at("name").get<std::string>(), p.value("description", std::string())});
    }
    return profile;
}

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

class MethodLog {
public:
    explicit MethodLog(std::string path) : path_(std::move(path)) {}

    void record(const std::string& method) { entries_.push_back({method, now_ms()}); }

    // Whole-file write on exit so readers never see a torn log.
    void flush() const {
        if (path_.empty()) return;
        json arr = json::array();
        for (const auto& e : entries_) {
            arr.push_back({{"method", e.method}, {"ts_ms", e.ts_ms}});
        }
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        out << arr.dump(2) << "\n";
    }

private:
    std::string path_;
    std::vector<MethodLogEntry> entries_;
};

json tools_page(const MockProfile& profile, const MockScript& script, std::size_t start) {
    json result;
    result["tools"] = json::array();
    std::size_t end = profile.tools.size();
    if (script.page_size > 0) end = std::min(end, start + script.page_size);
    for (std::size_t i = start; i < end; ++i) {
        const auto& tool = profile.tools[i];
        result["tools"].push_back({{"name", tool.name},
                                   {"description", tool.description},
                                   {"inputSchema", tool.input_schema}});
    }
    if (end < profile.tools.size()) result["nextCursor"] = std::to_string(end);
    return result;
}

std::size_t cursor_from_params(const WireMessage& msg) {
    if (!msg.params.has_value() || !msg.params->is_object()) return 0;
    if (!msg.params->contains("cursor") || !(*msg.params)["cursor"].is_string()) return 0;
    try {
        return static_cast<std::size_t>(std::stoull((*msg.params)["cursor"].get<std::string>()));
    } catch (...) {
        return 0;
    }
}

}  // namespace

std::vector<std::string> mock_profile_names() {
    return {"filesystem", "slack", "everything", "chroma"};
}

MockProfile load_mock_profile(const std::string& name) {
    const char* data = nullptr;
    if (name == "filesystem") data = embedded::kProfileFilesystemJson;
    else if (name == "slack") data = embedded::kProfileSlackJson;
    else if (name == "everything") data = embedded::kProfileEverythingJson;
    else if (name == "chroma") data = embedded::kProfileChromaJson;
    else throw std::invalid_argument("unknown mock profile: " + name);
    return profile_from_json(json::parse(data));
}

std::vector<MethodLogEntry> read_method_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    json arr = json::parse(in, nullptr, false);
    if (arr.is_discarded() || !arr.is_array()) return {};
    std::vector<MethodLogEntry> entries;
    for (const auto& e : arr) {
        entries.push_back({e.value("method", std::string()), e.value("ts_ms", std::int64_t{0})});
    }
    return entries;
}

int serve_mock(const MockProfile& profile, std::istream& in, std::ostream& out,
               const MockScript& script, std::string method_log_path) {
    if (method_log_path.empty()) {
        if (const char* env = std::getenv(kMethodLogEnvVar)) method_log_path = env;
    }
    MethodLog log(method_log_path);

    auto reply = [&](const WireMessage& msg) {
        if (script.kind == MockScript::Kind::Silence) return;
        if (script.kind == MockScript::Kind::Delay && script.delay.count() > 0) {
            std::this_thread::sleep_for(script.delay);
        }
        out << encode_line(msg) << "\n" << std::flush;
    };

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        WireMessage msg;
        try {
            msg = decode_line(line);
        } catch (const ProtocolError&) {
            log.record("<parse-error>");
            reply(make_error(std::monostate{}, kParseError, "parse error"));
            continue;
        }

        if (!msg.method.has_value()) continue;  // stray response; nothing to do
        const std::string& method = *msg.method;
        log.record(method);

        if (msg.is_notification()) continue;

        if (method == kMethodInitialize) {
            json result;
            result["protocolVersion"] = script.protocol_version_override.empty()
                                            ? kProtocolVersion
                                            : script.protocol_version_override;
            result["capabilities"] = {{"tools", json::object()},
                                      {"resources", json::object()},
                                      {"prompts", json::object()}};
            result["serverInfo"] = {{"name", profile.server_info_name},
                                    {"version", profile.server_info_version}};
            reply(make_result(msg.id, result));
        } else if (method == kMethodToolsList) {
            if (script.kind == MockScript::Kind::Malformed) {
                // Handshake stays clean; listing replies come back as garbage.
                out << "{this is not a json-rpc reply" << "\n" << std::flush;
                continue;
            }
            reply(make_result(msg.id, tools_page(profile, script, cursor_from_params(msg))));
        } else if (method == kMethodResourcesList) {
            json result;
            result["resources"] = json::array();
            for (const auto& r : profile.resources) {
                result["resources"].push_back(
                    {{"name", r.uri_or_name}, {"description", r.description}});
            }
            reply(make_result(msg.id, result));
        } else if (method == kMethodPromptsList) {
            json result;
            result["prompts"] = json::array();
            for (const auto& p : profile.prompts) {
                result["prompts"].push_back({{"name", p.name}, {"description", p.description}});
            }
            reply(make_result(msg.id, result));
        } else {
            reply(make_error(msg.id, kMethodNotFound, "method not found: " + method));
        }
    }

    log.flush();
    return 0;
}

}  // namespace mcpscan
