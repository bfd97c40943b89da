#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mcpscan/agents.hpp"

namespace mcpscan {

// Environment variables for agentic mode.
inline constexpr const char* kModelEndpointEnvVar = "MCPSCAN_MODEL_ENDPOINT";
inline constexpr const char* kModelApiKeyEnvVar = "MCPSCAN_MODEL_API_KEY";
inline constexpr const char* kModelNameEnvVar = "MCPSCAN_MODEL_NAME";

// Pure helpers, unit-testable without a live endpoint.
nlohmann::json build_chat_request(const std::string& model_name,
                                  const std::vector<ChatMessage>& messages);
std::string extract_chat_content(const nlohmann::json& response);  // throws ModelError

struct ParsedUrl {
    bool https = false;
    std::string origin;  // scheme://host[:port]
    std::string path;    // /v1/chat/completions
};
ParsedUrl parse_url(const std::string& url);  // throws ModelError on junk

/// OpenAI-compatible chat-completions backend; the endpoint is the full URL
/// of the completions route.
class HttpChatModel : public ChatModel {
public:
    HttpChatModel(std::string endpoint_url, std::string api_key, std::string model_name);

    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    std::string endpoint_url_;
    std::string api_key_;
    std::string model_name_;
};

}  // namespace mcpscan
