#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcpscan/client.hpp"
#include "mcpscan/rules.hpp"

namespace mcpscan {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pluggable chat-completion backend. Stateless between calls; the caller
/// owns conversation state. Implementations must tolerate concurrent calls.
class ChatModel {
public:
    virtual ~ChatModel() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;  // throws ModelError
};

struct KnowledgeHit {
    std::string title;
    std::string snippet;
    std::string locator;
};

/// Pluggable knowledge-base adapter (web, arXiv, Hacker News, local files...).
class KnowledgeSource {
public:
    virtual ~KnowledgeSource() = default;
    virtual std::string name() const = 0;
    virtual std::vector<KnowledgeHit> search(const std::string& query, std::size_t limit) = 0;
};

struct ImplicatedFeature {
    enum class Kind { Tool, Resource, Prompt };
    Kind kind = Kind::Tool;
    std::string name;

    bool operator==(const ImplicatedFeature&) const = default;
};

std::string to_string(ImplicatedFeature::Kind kind);
ImplicatedFeature::Kind feature_kind_from_string(const std::string& s);

struct CandidateVulnerability {
    std::string server_name;
    std::vector<ImplicatedFeature> implicated;  // non-empty
    std::string hypothesis;
    std::string example;

    bool operator==(const CandidateVulnerability&) const = default;
};

struct Corroboration {
    std::string title;
    std::string locator;

    bool operator==(const Corroboration&) const = default;
};

struct AuditedVulnerability {
    CandidateVulnerability candidate;
    std::vector<Corroboration> corroborations;
    std::vector<std::string> remediations;  // never empty
    std::vector<std::string> best_practices;
};

struct ProbeResult {
    std::vector<CandidateVulnerability> candidates;
    std::vector<std::string> warnings;
};

/// Stage 1: red-team probe of one server's inventory. Unparseable model
/// output is retried once, then surfaced as a degraded warning with zero
/// candidates. Servers with no features produce no model call.
/// Model transport failures propagate as ModelError.
ProbeResult hacker_probe(const ServerFeatures& features, ChatModel& model);

struct AuditResult {
    AuditedVulnerability audited;
    std::vector<std::string> warnings;
};

/// Stage 2: knowledge-base search plus model-derived remediations. Sources
/// that error are skipped with a warning; a failing model degrades to a
/// generic remediation. Requires at least one source.
AuditResult audit_vulnerability(const CandidateVulnerability& candidate,
                                const std::vector<KnowledgeSource*>& sources, ChatModel& model);

/// Stage 3: deterministic consolidation. Audited vulnerabilities become
/// AGENT findings and merge with rule findings on (attack class, implicated
/// set); remediation lists union preserving order, RULE descriptions win.
std::vector<Finding> supervise(const std::vector<AuditedVulnerability>& audited,
                               const std::vector<Finding>& rule_findings);

/// Capability/keyword based attack-class assignment for agent findings.
AttackClass infer_attack_class(const CandidateVulnerability& candidate);

struct AgentPipelineResult {
    std::vector<Finding> findings;
    std::vector<std::string> warnings;
};

/// Full three-stage pipeline over every scanned server. probe_rounds repeats
/// stage 1 with union-merge (candidates deduped on implicated set). Any model
/// transport failure degrades the scan to rule-only findings.
AgentPipelineResult run_agent_pipeline(const std::vector<ServerFeatures>& features,
                                       ChatModel& model,
                                       const std::vector<KnowledgeSource*>& sources,
                                       int probe_rounds,
                                       const std::vector<Finding>& rule_findings);

/// In-memory knowledge source with token-overlap ranking.
class MemoryKnowledgeSource : public KnowledgeSource {
public:
    struct Entry {
        std::string title;
        std::string snippet;
        std::string locator;
        std::vector<std::string> keywords;
    };

    MemoryKnowledgeSource(std::string name, std::vector<Entry> entries);

    std::string name() const override { return name_; }
    std::vector<KnowledgeHit> search(const std::string& query, std::size_t limit) override;

    static MemoryKnowledgeSource from_json(const nlohmann::json& doc);
    static MemoryKnowledgeSource from_file(const std::filesystem::path& path);
    /// The embedded MCP-security knowledge base.
    static MemoryKnowledgeSource builtin();

private:
    std::string name_;
    std::vector<Entry> entries_;
};

// Shipped agent prompts (data/prompts/), embedded.
std::string hacker_system_prompt();
std::string auditor_system_prompt();

}  // namespace mcpscan
