#include "mcpscan/client.hpp"

#include "mcpscan/util.hpp"

namespace mcpscan {

using nlohmann::json;

Session Session::connect(const ServerSpec& spec, const ConnectOptions& options) {
    Session session;
    session.spec_ = spec;
    session.deadline_ = deadline_after(options.timeout);
    session.kill_grace_ = options.kill_grace;

    SpawnOptions spawn;
    spawn.command = spec.command;
    spawn.args = spec.args;
    spawn.env_overrides = spec.env;
    if (options.env_mode == EnvMode::Scrubbed) {
        for (auto& [name, value] : spawn.env_overrides) {
            if (is_secret_name(name, options.redaction)) value = options.redaction.replacement;
        }
    }

    session.child_ = std::make_unique<ChildProcess>(ChildProcess::spawn(spawn));
    session.open_ = true;

    json init_params = {
        {"protocolVersion", kProtocolVersion},
        {"capabilities", json::object()},
        {"clientInfo", {{"name", "mcpscan"}, {"version", "0.1.0"}}},
    };

    WireMessage response;
    try {
        response = session.request(kMethodInitialize, init_params);
    } catch (...) {
        session.close();
        throw;
    }

    if (response.error.has_value()) {
        session.warnings_.push_back("initialize rejected: " + response.error->message);
    } else if (response.result.has_value() && response.result->is_object()) {
        const json& result = *response.result;
        if (result.contains("protocolVersion") && result["protocolVersion"].is_string()) {
            session.protocol_info_.protocol_version = result["protocolVersion"].get<std::string>();
            if (session.protocol_info_.protocol_version != kProtocolVersion) {
                session.warnings_.push_back(
                    "protocol version mismatch: server offered " +
                    session.protocol_info_.protocol_version + ", client speaks " +
                    kProtocolVersion + "; continuing best-effort");
            }
        }
        if (result.contains("serverInfo") && result["serverInfo"].is_object()) {
            const json& info = result["serverInfo"];
            if (info.contains("name") && info["name"].is_string()) {
                session.protocol_info_.server_name = info["name"].get<std::string>();
            }
            if (info.contains("version") && info["version"].is_string()) {
                session.protocol_info_.server_version = info["version"].get<std::string>();
            }
        }
    }

    session.child_->write_line(encode_line(make_notification(kMethodInitialized)));
    return session;
}

Session::~Session() {
    if (open_) close();
}

WireMessage Session::request(const std::string& method, std::optional<json> params) {
    if (!open_) throw SessionError("session for \"" + spec_.name + "\" is closed");

    const std::int64_t id = next_request_id_++;
    child_->write_line(encode_line(make_request(id, method, std::move(params))));

    std::string line;
    for (;;) {
        auto status = child_->read_line(line, deadline_);
        if (status == ChildProcess::ReadStatus::Timeout) {
            throw TimeoutError("server \"" + spec_.name + "\" timed out awaiting response to " +
                               method);
        }
        if (status == ChildProcess::ReadStatus::Eof) {
            throw SessionError("server \"" + spec_.name + "\" closed its transport during " +
                               method);
        }
        if (line.empty()) continue;

        WireMessage msg = decode_line(line);
        if (msg.is_response()) {
            if (msg.id == RequestId{id}) return msg;
            warnings_.push_back("dropped response with unexpected id " + id_to_string(msg.id));
            continue;
        }
        if (msg.is_request()) {
            // Server-initiated request (e.g. sampling); the scanner implements none.
            child_->write_line(encode_line(
                make_error(msg.id, kMethodNotFound, "client method not supported: " + *msg.method)));
            continue;
        }
        // Server notification (logging etc.) — irrelevant to enumeration.
    }
}

nlohmann::json Session::list_category(const char* method, const char* array_key) {
    json items = json::array();
    std::optional<std::string> cursor;
    for (;;) {
        std::optional<json> params;
        if (cursor.has_value()) params = json{{"cursor", *cursor}};
        WireMessage response = request(method, std::move(params));

        if (response.error.has_value()) {
            if (response.error->code == kMethodNotFound) return json::array();
            warnings_.push_back(std::string(method) + " failed on \"" + spec_.name +
                                "\": " + response.error->message);
            return json::array();
        }
        const json& result = *response.result;
        if (!result.is_object() || !result.contains(array_key) ||
            !result[array_key].is_array()) {
            throw ProtocolError(std::string(method) + " result lacks \"" + array_key +
                                    "\" array",
                                result.dump());
        }
        for (const auto& item : result[array_key]) items.push_back(item);

        if (result.contains("nextCursor") && result["nextCursor"].is_string() &&
            !result["nextCursor"].get<std::string>().empty()) {
            cursor = result["nextCursor"].get<std::string>();
        } else {
            return items;
        }
    }
}

ServerFeatures Session::enumerate_features() {
    if (!open_) throw SessionError("session for \"" + spec_.name + "\" is closed");

    ServerFeatures features;
    features.server_name = spec_.name;
    features.protocol_info = protocol_info_;

    for (const auto& item : list_category(kMethodToolsList, "tools")) {
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
            throw ProtocolError("tool descriptor lacks a name", item.dump());
        }
        ToolDescriptor tool;
        tool.name = item["name"].get<std::string>();
        if (item.contains("description") && item["description"].is_string()) {
            tool.description = item["description"].get<std::string>();
        }
        if (item.contains("inputSchema")) tool.input_schema = item["inputSchema"];
        features.tools.push_back(std::move(tool));
    }

    for (const auto& item : list_category(kMethodResourcesList, "resources")) {
        if (!item.is_object()) throw ProtocolError("resource descriptor is not an object", item.dump());
        ResourceDescriptor res;
        if (item.contains("uri") && item["uri"].is_string()) {
            res.uri_or_name = item["uri"].get<std::string>();
        } else if (item.contains("name") && item["name"].is_string()) {
            res.uri_or_name = item["name"].get<std::string>();
        } else {
            throw ProtocolError("resource descriptor lacks uri and name", item.dump());
        }
        if (item.contains("description") && item["description"].is_string()) {
            res.description = item["description"].get<std::string>();
        }
        features.resources.push_back(std::move(res));
    }

    for (const auto& item : list_category(kMethodPromptsList, "prompts")) {
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
            throw ProtocolError("prompt descriptor lacks a name", item.dump());
        }
        PromptDescriptor prompt;
        prompt.name = item["name"].get<std::string>();
        if (item.contains("description") && item["description"].is_string()) {
            prompt.description = item["description"].get<std::string>();
        }
        features.prompts.push_back(std::move(prompt));
    }

    return features;
}

Session::TerminationReport Session::close() {
    if (!child_) {
        TerminationReport report = last_termination_;
        report.already_closed = true;
        return report;
    }

    TerminationReport report;
    report.already_closed = !open_ || !child_->running();
    auto result = child_->terminate(kill_grace_);
    report.clean_exit = result.exited && result.exit_code == 0;
    report.exit_code = result.exit_code;
    report.term_signal = result.term_signal;
    report.forced_kill = result.forced_kill;
    report.stderr_excerpt = child_->stderr_output().substr(0, 2000);

    child_.reset();
    open_ = false;
    last_termination_ = report;
    return report;
}

}  // namespace mcpscan
