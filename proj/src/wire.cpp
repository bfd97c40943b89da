#include "mcpscan/wire.hpp"

namespace mcpscan {

using nlohmann::json;

nlohmann::json encode_message(const WireMessage& msg) {
    json j;
    j["jsonrpc"] = "2.0";
    if (msg.method.has_value()) {
        if (!std::holds_alternative<std::monostate>(msg.id)) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (!std::is_same_v<T, std::monostate>) j["id"] = v;
                },
                msg.id);
        }
        j["method"] = *msg.method;
        if (msg.params.has_value()) j["params"] = *msg.params;
    } else {
        // Responses always carry an id; null when the request id was unknown.
        if (std::holds_alternative<std::monostate>(msg.id)) {
            j["id"] = nullptr;
        } else {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (!std::is_same_v<T, std::monostate>) j["id"] = v;
                },
                msg.id);
        }
        if (msg.result.has_value()) {
            j["result"] = *msg.result;
        } else if (msg.error.has_value()) {
            j["error"] = {{"code", msg.error->code}, {"message", msg.error->message}};
        }
    }
    return j;
}

std::string encode_line(const WireMessage& msg) {
    return encode_message(msg).dump();
}

namespace {

RequestId decode_id(const json& j, std::string_view raw) {
    if (!j.contains("id") || j["id"].is_null()) return std::monostate{};
    const auto& id = j["id"];
    if (id.is_number_integer()) return id.get<std::int64_t>();
    if (id.is_string()) return id.get<std::string>();
    throw ProtocolError("message id must be an integer or a string", std::string(raw));
}

}  // namespace

WireMessage decode_message(const nlohmann::json& j, std::string_view raw_for_errors) {
    std::string raw(raw_for_errors.empty() ? j.dump() : raw_for_errors);
    if (!j.is_object()) throw ProtocolError("message is not a JSON object", raw);
    if (j.contains("jsonrpc") && j["jsonrpc"] != "2.0") {
        throw ProtocolError("unsupported jsonrpc version", raw);
    }

    WireMessage msg;
    msg.id = decode_id(j, raw);

    const bool has_method = j.contains("method");
    const bool has_result = j.contains("result");
    const bool has_error = j.contains("error");
    if (static_cast<int>(has_method) + static_cast<int>(has_result) +
            static_cast<int>(has_error) != 1) {
        throw ProtocolError("message must carry exactly one of method/result/error", raw);
    }

    if (has_method) {
        if (!j["method"].is_string()) throw ProtocolError("method is not a string", raw);
        msg.method = j["method"].get<std::string>();
        if (j.contains("params")) msg.params = j["params"];
    } else if (has_result) {
        msg.result = j["result"];
    } else {
        const auto& err = j["error"];
        if (!err.is_object() || !err.contains("code") || !err["code"].is_number_integer()) {
            throw ProtocolError("error member must be an object with an integer code", raw);
        }
        WireError e;
        e.code = err["code"].get<std::int64_t>();
        if (err.contains("message") && err["message"].is_string()) {
            e.message = err["message"].get<std::string>();
        }
        msg.error = e;
    }
    return msg;
}

WireMessage decode_line(std::string_view line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        throw ProtocolError("line is not valid JSON", std::string(line));
    }
    return decode_message(j, line);
}

WireMessage make_request(std::int64_t id, std::string method,
                         std::optional<nlohmann::json> params) {
    WireMessage msg;
    msg.id = id;
    msg.method = std::move(method);
    msg.params = std::move(params);
    return msg;
}

WireMessage make_notification(std::string method, std::optional<nlohmann::json> params) {
    WireMessage msg;
    msg.method = std::move(method);
    msg.params = std::move(params);
    return msg;
}

WireMessage make_result(RequestId id, nlohmann::json result) {
    WireMessage msg;
    msg.id = std::move(id);
    msg.result = std::move(result);
    return msg;
}

WireMessage make_error(RequestId id, std::int64_t code, std::string message) {
    WireMessage msg;
    msg.id = std::move(id);
    msg.error = WireError{code, std::move(message)};
    return msg;
}

std::string id_to_string(const RequestId& id) {
    if (std::holds_alternative<std::monostate>(id)) return "<none>";
    if (const auto* n = std::get_if<std::int64_t>(&id)) return std::to_string(*n);
    return "\"" + std::get<std::string>(id) + "\"";
}

}  // namespace mcpscan
