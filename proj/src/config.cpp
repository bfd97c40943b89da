#include "mcpscan/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mcpscan/util.hpp"

namespace mcpscan {

namespace {

using ordered_json = nlohmann::ordered_json;

// Tracks (line, column) for a byte offset reported by the JSON parser.
std::pair<int, int> line_col_at(std::string_view text, std::size_t byte_offset) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < byte_offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// SAX walker that reports the first duplicate key among siblings of any object.
class DuplicateKeyScanner : public nlohmann::json_sax<ordered_json> {
public:
    bool null() override { return true; }
    bool boolean(bool) override { return true; }
    bool number_integer(number_integer_t) override { return true; }
    bool number_unsigned(number_unsigned_t) override { return true; }
    bool number_float(number_float_t, const string_t&) override { return true; }
    bool string(string_t&) override { return true; }
    bool binary(binary_t&) override { return true; }

    bool start_object(std::size_t) override {
        objects_.emplace_back();
        return true;
    }
    bool key(string_t& k) override {
        auto& seen = objects_.back();
        if (!seen.insert(k).second) {
            duplicate = k;
            return false;
        }
        return true;
    }
    bool end_object() override {
        objects_.pop_back();
        return true;
    }
    bool start_array(std::size_t) override { return true; }
    bool end_array() override { return true; }

    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
        return false;
    }

    std::string duplicate;

private:
    std::vector<std::set<std::string>> objects_;
};

std::string validation_msg(const std::string& server, const std::string& what) {
    return "server \"" + server + "\": " + what;
}

}  // namespace

ScanConfig parse_config(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = line_col_at(text, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream msg;
        msg << "malformed JSON at line " << line << ", column " << col << ": " << e.what();
        throw ConfigError(ConfigError::Kind::Parse, msg.str(), line, col);
    }

    DuplicateKeyScanner dup;
    if (!ordered_json::sax_parse(text, &dup) && !dup.duplicate.empty()) {
        throw ConfigError(ConfigError::Kind::Validation,
                          "duplicate object key \"" + dup.duplicate + "\" in config");
    }

    if (!doc.is_object() || !doc.contains("mcpServers")) {
        throw ConfigError(ConfigError::Kind::Structure,
                          "config has no top-level \"mcpServers\" object");
    }
    const auto& servers = doc["mcpServers"];
    if (!servers.is_object()) {
        throw ConfigError(ConfigError::Kind::Structure, "\"mcpServers\" is not an object");
    }

    ScanConfig config;
    config.source_digest = sha256_digest(text);

    for (const auto& [name, entry] : servers.items()) {
        if (name.empty()) {
            throw ConfigError(ConfigError::Kind::Validation, "server with empty name");
        }
        if (!entry.is_object()) {
            throw ConfigError(ConfigError::Kind::Validation,
                              validation_msg(name, "entry is not an object"));
        }

        ServerSpec spec;
        spec.name = name;

        if (!entry.contains("command") || !entry["command"].is_string() ||
            entry["command"].get<std::string>().empty()) {
            throw ConfigError(ConfigError::Kind::Validation,
                              validation_msg(name, "missing or empty \"command\""));
        }
        spec.command = entry["command"].get<std::string>();

        if (!entry.contains("args") || !entry["args"].is_array()) {
            throw ConfigError(ConfigError::Kind::Validation,
                              validation_msg(name, "missing \"args\" array"));
        }
        for (const auto& a : entry["args"]) {
            if (!a.is_string()) {
                throw ConfigError(ConfigError::Kind::Validation,
                                  validation_msg(name, "\"args\" entries must be strings"));
            }
            spec.args.push_back(a.get<std::string>());
        }

        if (entry.contains("env")) {
            if (!entry["env"].is_object()) {
                throw ConfigError(ConfigError::Kind::Validation,
                                  validation_msg(name, "\"env\" is not an object"));
            }
            for (const auto& [k, v] : entry["env"].items()) {
                if (!v.is_string()) {
                    throw ConfigError(ConfigError::Kind::Validation,
                                      validation_msg(name, "env value for \"" + k +
                                                               "\" is not a string"));
                }
                spec.env[k] = v.get<std::string>();
            }
        }

        for (const auto& [k, v] : entry.items()) {
            if (k != "command" && k != "args" && k != "env") spec.extra[k] = v;
        }

        config.servers.push_back(std::move(spec));
    }
    return config;
}

ScanConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(ConfigError::Kind::Structure,
                          "cannot read config file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ScanConfig& config) {
    ordered_json servers = ordered_json::object();
    for (const auto& spec : config.servers) {
        ordered_json entry;
        entry["command"] = spec.command;
        entry["args"] = spec.args;
        entry["env"] = ordered_json::object();
        for (const auto& [k, v] : spec.env) entry["env"][k] = v;
        for (const auto& [k, v] : spec.extra.items()) entry[k] = v;
        servers[spec.name] = std::move(entry);
    }
    ordered_json doc;
    doc["mcpServers"] = std::move(servers);
    return doc.dump(2) + "\n";
}

bool is_secret_name(std::string_view env_name, const RedactionPolicy& policy) {
    for (const auto& pattern : policy.secret_name_patterns) {
        if (contains_ci(env_name, pattern)) return true;
    }
    return false;
}

ScanConfig redact(ScanConfig config, const RedactionPolicy& policy) {
    for (auto& spec : config.servers) {
        for (auto& [name, value] : spec.env) {
            if (is_secret_name(name, policy)) value = policy.replacement;
        }
    }
    return config;
}

}  // namespace mcpscan
