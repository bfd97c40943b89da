#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "mcpscan/agents.hpp"
#include "mcpscan/client.hpp"
#include "mcpscan/config.hpp"
#include "mcpscan/report.hpp"
#include "mcpscan/rules.hpp"

namespace mcpscan {

struct ScanSettings {
    std::chrono::milliseconds per_server_timeout{30000};
    std::chrono::milliseconds kill_grace{2000};
    EnvMode env_mode = EnvMode::Scrubbed;
    RedactionPolicy redaction;
    std::size_t parallelism = 0;  // 0: one worker per server
    std::string created_at;       // injected; rendering stays deterministic
    const RuleCatalog* catalog = nullptr;  // null: builtin

    // Agentic stage; model == nullptr means offline (rule-only) scanning.
    ChatModel* model = nullptr;
    std::vector<KnowledgeSource*> knowledge;
    int probe_rounds = 1;
};

/// config -> connect -> enumerate -> rules -> (agents) -> report.
/// Servers that fail to launch or enumerate contribute per-server warnings,
/// never a global failure.
ScanReport run_scan(const ScanConfig& config, const ScanSettings& settings);

}  // namespace mcpscan
