#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

namespace mcpscan {

// JSON-RPC 2.0 error codes used on the wire.
inline constexpr std::int64_t kParseError = -32700;
inline constexpr std::int64_t kInvalidRequest = -32600;
inline constexpr std::int64_t kMethodNotFound = -32601;

// MCP methods this artifact speaks. Enumeration never goes beyond these.
inline constexpr const char* kMethodInitialize = "initialize";
inline constexpr const char* kMethodInitialized = "notifications/initialized";
inline constexpr const char* kMethodToolsList = "tools/list";
inline constexpr const char* kMethodResourcesList = "resources/list";
inline constexpr const char* kMethodPromptsList = "prompts/list";

inline constexpr const char* kProtocolVersion = "2024-11-05";

// monostate = id absent (notification) or null id.
using RequestId = std::variant<std::monostate, std::int64_t, std::string>;

struct WireError {
    std::int64_t code = 0;
    std::string message;

    bool operator==(const WireError&) const = default;
};

/// One JSON-RPC message. Exactly one of {method, result, error} is present:
/// method => request or notification, result/error => response.
struct WireMessage {
    RequestId id{};
    std::optional<std::string> method;
    std::optional<nlohmann::json> params;
    std::optional<nlohmann::json> result;
    std::optional<WireError> error;

    bool is_request() const { return method.has_value() && !std::holds_alternative<std::monostate>(id); }
    bool is_notification() const { return method.has_value() && std::holds_alternative<std::monostate>(id); }
    bool is_response() const { return result.has_value() || error.has_value(); }

    bool operator==(const WireMessage&) const = default;
};

/// Raised on malformed wire payloads; carries the offending raw message.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(const std::string& msg, std::string raw_message)
        : std::runtime_error(msg + " (raw message: " + raw_message + ")"),
          raw(std::move(raw_message)) {}

    std::string raw;
};

nlohmann::json encode_message(const WireMessage& msg);
// One message per line; dump() escapes embedded newlines so the frame is safe.
std::string encode_line(const WireMessage& msg);

WireMessage decode_message(const nlohmann::json& j, std::string_view raw_for_errors = {});
WireMessage decode_line(std::string_view line);

WireMessage make_request(std::int64_t id, std::string method,
                         std::optional<nlohmann::json> params = std::nullopt);
WireMessage make_notification(std::string method,
                              std::optional<nlohmann::json> params = std::nullopt);
WireMessage make_result(RequestId id, nlohmann::json result);
WireMessage make_error(RequestId id, std::int64_t code, std::string message);

std::string id_to_string(const RequestId& id);

}  // namespace mcpscan
