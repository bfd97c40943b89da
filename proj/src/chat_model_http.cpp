#include "mcpscan/chat_model_http.hpp"

#include "httplib.h"

namespace mcpscan {

using nlohmann::json;

nlohmann::json build_chat_request(const std::string& model_name,
                                  const std::vector<ChatMessage>& messages) {
    json req;
    req["model"] = model_name;
    req["messages"] = json::array();
    for (const auto& m : messages) {
        req["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    req["temperature"] = 0.2;
    return req;
}

std::string extract_chat_content(const nlohmann::json& response) {
    if (!response.is_object() || !response.contains("choices") ||
        !response["choices"].is_array() || response["choices"].empty()) {
        throw ModelError("model response has no choices");
    }
    const json& first = response["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        throw ModelError("model response has no message content");
    }
    return first["message"]["content"].get<std::string>();
}

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl parsed;
    std::string rest;
    if (url.rfind("https://", 0) == 0) {
        parsed.https = true;
        rest = url.substr(8);
    } else if (url.rfind("http://", 0) == 0) {
        rest = url.substr(7);
    } else {
        throw ModelError("model endpoint must be an http(s) URL: " + url);
    }
    auto slash = rest.find('/');
    std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
    if (host.empty()) throw ModelError("model endpoint has no host: " + url);
    parsed.origin = (parsed.https ? "https://" : "http://") + host;
    parsed.path = slash == std::string::npos ? "/" : rest.substr(slash);
    return parsed;
}

HttpChatModel::HttpChatModel(std::string endpoint_url, std::string api_key,
                             std::string model_name)
    : endpoint_url_(std::move(endpoint_url)),
      api_key_(std::move(api_key)),
      model_name_(std::move(model_name)) {}

std::string HttpChatModel::complete(const std::vector<ChatMessage>& messages) {
    ParsedUrl url = parse_url(endpoint_url_);

    httplib::Client client(url.origin);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(120, 0);

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto result = client.Post(url.path, headers,
                              build_chat_request(model_name_, messages).dump(),
                              "application/json");
    if (!result) {
        throw ModelError("model endpoint unreachable: " + httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw ModelError("model endpoint returned HTTP " + std::to_string(result->status));
    }
    json body = json::parse(result->body, nullptr, false);
    if (body.is_discarded()) throw ModelError("model endpoint returned non-JSON body");
    return extract_chat_content(body);
}

}  // namespace mcpscan
