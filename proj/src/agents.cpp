#include "mcpscan/agents.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>

#include "mcpscan/embedded_data.hpp"
#include "mcpscan/util.hpp"

namespace mcpscan {

using nlohmann::json;

std::string to_string(ImplicatedFeature::Kind kind) {
    switch (kind) {
        case ImplicatedFeature::Kind::Tool: return "tool";
        case ImplicatedFeature::Kind::Resource: return "resource";
        case ImplicatedFeature::Kind::Prompt: return "prompt";
    }
    return "tool";
}

ImplicatedFeature::Kind feature_kind_from_string(const std::string& s) {
    if (s == "tool") return ImplicatedFeature::Kind::Tool;
    if (s == "resource") return ImplicatedFeature::Kind::Resource;
    if (s == "prompt") return ImplicatedFeature::Kind::Prompt;
    throw std::invalid_argument("unknown feature kind: " + s);
}

std::string hacker_system_prompt() { return embedded::kHackerSystemPrompt; }
std::string auditor_system_prompt() { return embedded::kAuditorSystemPrompt; }

namespace {

constexpr const char* kGenericRemediation =
    "Review the implicated features' access scope and apply least-privilege "
    "restrictions before deployment.";

// Models love code fences despite instructions; strip them before parsing.
std::string strip_code_fences(std::string text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    auto last = text.find_last_not_of(" \t\r\n");
    text = text.substr(first, last - first + 1);
    if (text.rfind("```", 0) == 0) {
        auto nl = text.find('\n');
        if (nl != std::string::npos && text.size() >= nl + 4 &&
            text.compare(text.size() - 3, 3, "```") == 0) {
            text = text.substr(nl + 1, text.size() - nl - 1 - 3);
        }
    }
    return text;
}

json inventory_json(const ServerFeatures& features) {
    json inv;
    inv["server"] = features.server_name;
    inv["tools"] = json::array();
    for (const auto& t : features.tools) {
        inv["tools"].push_back({{"name", t.name},
                                {"description", t.description},
                                {"input_schema", t.input_schema}});
    }
    inv["resources"] = json::array();
    for (const auto& r : features.resources) {
        inv["resources"].push_back({{"name", r.uri_or_name}, {"description", r.description}});
    }
    inv["prompts"] = json::array();
    for (const auto& p : features.prompts) {
        inv["prompts"].push_back({{"name", p.name}, {"description", p.description}});
    }
    return inv;
}

bool known_feature(const ServerFeatures& features, const ImplicatedFeature& f) {
    switch (f.kind) {
        case ImplicatedFeature::Kind::Tool:
            return std::any_of(features.tools.begin(), features.tools.end(),
                               [&](const auto& t) { return t.name == f.name; });
        case ImplicatedFeature::Kind::Resource:
            return std::any_of(features.resources.begin(), features.resources.end(),
                               [&](const auto& r) { return r.uri_or_name == f.name; });
        case ImplicatedFeature::Kind::Prompt:
            return std::any_of(features.prompts.begin(), features.prompts.end(),
                               [&](const auto& p) { return p.name == f.name; });
    }
    return false;
}

struct ParsedCandidates {
    std::vector<CandidateVulnerability> candidates;
    std::vector<std::string> warnings;
};

// Schema violations return nullopt (caller retries); candidates naming
// unknown features are salvage-skipped with a warning.
std::optional<ParsedCandidates> parse_candidates(const std::string& reply,
                                                 const ServerFeatures& features) {
    json doc = json::parse(strip_code_fences(reply), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("candidates") ||
        !doc["candidates"].is_array()) {
        return std::nullopt;
    }

    ParsedCandidates out;
    for (const auto& entry : doc["candidates"]) {
        if (!entry.is_object() || !entry.contains("implicated") ||
            !entry["implicated"].is_array() || entry["implicated"].empty() ||
            !entry.contains("hypothesis") || !entry["hypothesis"].is_string()) {
            return std::nullopt;
        }
        CandidateVulnerability candidate;
        candidate.server_name = features.server_name;
        candidate.hypothesis = entry["hypothesis"].get<std::string>();
        if (entry.contains("example") && entry["example"].is_string()) {
            candidate.example = entry["example"].get<std::string>();
        }

        bool unknown = false;
        for (const auto& imp : entry["implicated"]) {
            if (!imp.is_object() || !imp.contains("kind") || !imp["kind"].is_string() ||
                !imp.contains("name") || !imp["name"].is_string() ||
                imp["name"].get<std::string>().empty()) {
                return std::nullopt;
            }
            ImplicatedFeature feature;
            try {
                feature.kind = feature_kind_from_string(imp["kind"].get<std::string>());
            } catch (const std::invalid_argument&) {
                return std::nullopt;
            }
            feature.name = imp["name"].get<std::string>();
            if (!known_feature(features, feature)) {
                unknown = true;
                break;
            }
            candidate.implicated.push_back(std::move(feature));
        }
        if (unknown || candidate.implicated.empty()) {
            out.warnings.push_back("hacker probe: dropped candidate naming unknown features on \"" +
                                   features.server_name + "\"");
            continue;
        }
        out.candidates.push_back(std::move(candidate));
    }
    return out;
}

std::string feature_names(const CandidateVulnerability& candidate) {
    std::vector<std::string> names;
    for (const auto& f : candidate.implicated) names.push_back(f.name);
    return join(names, " ");
}

// Implementation-defined query shape: implicated names plus the leading
// words of the hypothesis.
std::string synthesize_query(const CandidateVulnerability& candidate) {
    std::istringstream words(candidate.hypothesis);
    std::string word;
    std::vector<std::string> lead;
    while (lead.size() < 12 && words >> word) lead.push_back(word);
    return feature_names(candidate) + " " + join(lead, " ");
}

}  // namespace

ProbeResult hacker_probe(const ServerFeatures& features, ChatModel& model) {
    ProbeResult result;
    if (features.tools.empty() && features.resources.empty() && features.prompts.empty()) {
        return result;  // nothing to probe, no model call
    }

    std::vector<ChatMessage> messages = {
        {"system", hacker_system_prompt()},
        {"user", "Feature inventory of MCP server \"" + features.server_name + "\":\n" +
                     inventory_json(features).dump(2)},
    };

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply = model.complete(messages);
        auto parsed = parse_candidates(reply, features);
        if (parsed.has_value()) {
            result.candidates = std::move(parsed->candidates);
            result.warnings = std::move(parsed->warnings);
            return result;
        }
        messages.push_back({"assistant", reply});
        messages.push_back({"user",
                            "That reply was not parseable. Reply again with JSON only, exactly "
                            "{\"candidates\": [...]} as instructed."});
    }

    result.warnings.push_back("hacker probe degraded: unparseable model output for \"" +
                              features.server_name + "\" after retry; no candidates");
    return result;
}

AuditResult audit_vulnerability(const CandidateVulnerability& candidate,
                                const std::vector<KnowledgeSource*>& sources, ChatModel& model) {
    if (sources.empty()) {
        throw std::invalid_argument("audit_vulnerability requires at least one knowledge source");
    }

    AuditResult result;
    result.audited.candidate = candidate;

    const std::string query = synthesize_query(candidate);
    json hits = json::array();
    for (KnowledgeSource* source : sources) {
        try {
            for (const auto& hit : source->search(query, 3)) {
                result.audited.corroborations.push_back({hit.title, hit.locator});
                hits.push_back({{"source", source->name()},
                                {"title", hit.title},
                                {"snippet", hit.snippet},
                                {"locator", hit.locator}});
            }
        } catch (const std::exception& e) {
            result.warnings.push_back("knowledge source \"" + source->name() +
                                      "\" failed: " + e.what());
        }
    }

    json request;
    request["candidate"] = {{"server", candidate.server_name},
                            {"features", feature_names(candidate)},
                            {"hypothesis", candidate.hypothesis},
                            {"example", candidate.example}};
    request["search_results"] = hits;

    std::vector<ChatMessage> messages = {
        {"system", auditor_system_prompt()},
        {"user", request.dump(2)},
    };

    try {
        json doc = json::parse(strip_code_fences(model.complete(messages)), nullptr, false);
        if (doc.is_object() && doc.contains("remediations") && doc["remediations"].is_array() &&
            !doc["remediations"].empty()) {
            for (const auto& r : doc["remediations"]) {
                if (r.is_string()) result.audited.remediations.push_back(r.get<std::string>());
            }
            if (doc.contains("best_practices") && doc["best_practices"].is_array()) {
                for (const auto& b : doc["best_practices"]) {
                    if (b.is_string()) result.audited.best_practices.push_back(b.get<std::string>());
                }
            }
        }
    } catch (const ModelError& e) {
        result.warnings.push_back("auditor degraded for \"" + candidate.server_name +
                                  "\": " + e.what());
    }

    if (result.audited.remediations.empty()) {
        if (result.warnings.empty()) {
            result.warnings.push_back("auditor degraded for \"" + candidate.server_name +
                                      "\": unparseable model output; generic remediation used");
        }
        result.audited.remediations.push_back(kGenericRemediation);
    }
    return result;
}

AttackClass infer_attack_class(const CandidateVulnerability& candidate) {
    std::set<CapabilityTag> tags;
    for (const auto& f : candidate.implicated) {
        if (f.kind != ImplicatedFeature::Kind::Tool) continue;
        auto t = classify_tool(ToolDescriptor{f.name, "", {}});
        tags.insert(t.begin(), t.end());
    }
    const std::string text = to_lower(candidate.hypothesis + " " + candidate.example);
    auto mentions = [&](std::initializer_list<const char*> needles) {
        return std::any_of(needles.begin(), needles.end(),
                           [&](const char* n) { return text.find(n) != std::string::npos; });
    };

    const bool retrieval = tags.count(CapabilityTag::RETRIEVAL_QUERY) ||
                           mentions({"retriev", "vector database", "poisoned document", "rag"});
    const bool file_write = tags.count(CapabilityTag::FILE_WRITE) ||
                            tags.count(CapabilityTag::FILE_EDIT);
    const bool env_read = tags.count(CapabilityTag::ENV_READ) ||
                          mentions({"environment variable", "printenv"});
    const bool messaging = tags.count(CapabilityTag::MESSAGING_SEND) ||
                           mentions({"slack", "post message", "exfiltrat"});

    if (retrieval && (file_write || env_read || messaging)) return AttackClass::RADE_CHAIN;
    if (env_read && messaging) return AttackClass::EXFIL_CHAIN;
    if (mentions({"ssh", "authorized_keys", "remote access", "reverse shell", "backdoor"})) {
        return AttackClass::RAC;
    }
    if (env_read || mentions({"credential", "api key", "token", "secret", "steal"})) {
        return AttackClass::CT;
    }
    if (file_write || mentions({"inject", "malicious code", "overwrite"})) return AttackClass::MCE;
    return AttackClass::CT;
}

namespace {

std::vector<Implicated> to_implicated(const CandidateVulnerability& candidate) {
    std::vector<Implicated> out;
    for (const auto& f : candidate.implicated) out.push_back({candidate.server_name, f.name});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void union_append(std::vector<std::string>& target, const std::vector<std::string>& extra) {
    for (const auto& item : extra) {
        if (std::find(target.begin(), target.end(), item) == target.end()) {
            target.push_back(item);
        }
    }
}

}  // namespace

std::vector<Finding> supervise(const std::vector<AuditedVulnerability>& audited,
                               const std::vector<Finding>& rule_findings) {
    std::vector<Finding> merged = rule_findings;

    for (const auto& audit : audited) {
        if (audit.candidate.implicated.empty()) continue;

        const AttackClass cls = infer_attack_class(audit.candidate);
        auto implicated = to_implicated(audit.candidate);

        std::vector<std::string> remediations = audit.remediations;
        for (const auto& bp : audit.best_practices) {
            std::string labelled = "Best practice: " + bp;
            if (std::find(remediations.begin(), remediations.end(), labelled) ==
                remediations.end()) {
                remediations.push_back(std::move(labelled));
            }
        }
        std::vector<std::string> references;
        for (const auto& c : audit.corroborations) {
            std::string ref = c.title.empty() ? c.locator : c.title + " (" + c.locator + ")";
            if (std::find(references.begin(), references.end(), ref) == references.end()) {
                references.push_back(std::move(ref));
            }
        }

        auto duplicate = std::find_if(merged.begin(), merged.end(), [&](const Finding& f) {
            return f.attack_class == cls && f.implicated == implicated;
        });
        if (duplicate != merged.end()) {
            // Rule finding wins the description; remediations union in order.
            union_append(duplicate->remediations, remediations);
            union_append(duplicate->references, references);
            continue;
        }

        Finding finding;
        finding.attack_class = cls;
        finding.severity = severity_for(cls);
        finding.implicated = implicated;
        finding.finding_id = make_finding_id("agent/" + to_string(cls), implicated);
        finding.description = audit.candidate.hypothesis;
        finding.example = audit.candidate.example;
        finding.remediations = std::move(remediations);
        finding.references = std::move(references);
        finding.provenance = Provenance::AGENT;
        merged.push_back(std::move(finding));
    }

    sort_findings(merged);
    return merged;
}

AgentPipelineResult run_agent_pipeline(const std::vector<ServerFeatures>& features,
                                       ChatModel& model,
                                       const std::vector<KnowledgeSource*>& sources,
                                       int probe_rounds,
                                       const std::vector<Finding>& rule_findings) {
    if (sources.empty()) {
        throw std::invalid_argument("agent pipeline requires at least one knowledge source");
    }
    if (probe_rounds < 1) probe_rounds = 1;

    AgentPipelineResult result;
    std::vector<CandidateVulnerability> candidates;
    bool model_down = false;

    for (const auto& f : features) {
        for (int round = 0; round < probe_rounds && !model_down; ++round) {
            try {
                ProbeResult probe = hacker_probe(f, model);
                for (auto& w : probe.warnings) result.warnings.push_back(std::move(w));
                for (auto& candidate : probe.candidates) {
                    auto key = to_implicated(candidate);
                    bool seen = std::any_of(candidates.begin(), candidates.end(),
                                            [&](const CandidateVulnerability& c) {
                                                return to_implicated(c) == key;
                                            });
                    if (!seen) candidates.push_back(std::move(candidate));
                }
            } catch (const ModelError& e) {
                result.warnings.push_back(
                    std::string("agent pipeline degraded to rule-only findings: ") + e.what());
                model_down = true;
            }
        }
        if (model_down) break;
    }

    std::vector<AuditedVulnerability> audited;
    if (!model_down) {
        // Independent network-bound calls; audit concurrently, join in order.
        std::vector<std::future<AuditResult>> futures;
        futures.reserve(candidates.size());
        for (const auto& candidate : candidates) {
            futures.push_back(std::async(std::launch::async, [&candidate, &sources, &model] {
                return audit_vulnerability(candidate, sources, model);
            }));
        }
        for (auto& future : futures) {
            AuditResult audit = future.get();
            for (auto& w : audit.warnings) result.warnings.push_back(std::move(w));
            audited.push_back(std::move(audit.audited));
        }
    }

    result.findings = supervise(audited, rule_findings);
    return result;
}

MemoryKnowledgeSource::MemoryKnowledgeSource(std::string name, std::vector<Entry> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {}

std::vector<KnowledgeHit> MemoryKnowledgeSource::search(const std::string& query,
                                                        std::size_t limit) {
    // Token-overlap scoring; short tokens are noise.
    std::vector<std::string> tokens;
    std::string current;
    for (char c : to_lower(query)) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(c);
        } else if (!current.empty()) {
            if (current.size() >= 3) tokens.push_back(current);
            current.clear();
        }
    }
    if (current.size() >= 3) tokens.push_back(current);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

    std::vector<std::pair<int, const Entry*>> scored;
    for (const auto& entry : entries_) {
        std::string text = to_lower(entry.title + " " + entry.snippet + " " +
                                    join(entry.keywords, " "));
        int score = 0;
        for (const auto& token : tokens) {
            if (text.find(token) != std::string::npos) ++score;
        }
        if (score > 0) scored.emplace_back(score, &entry);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->title < b.second->title;
    });

    std::vector<KnowledgeHit> hits;
    for (const auto& [score, entry] : scored) {
        if (hits.size() >= limit) break;
        hits.push_back({entry->title, entry->snippet, entry->locator});
    }
    return hits;
}

MemoryKnowledgeSource MemoryKnowledgeSource::from_json(const json& doc) {
    std::vector<Entry> entries;
    for (const auto& e : doc.at("entries")) {
        Entry entry;
        entry.title = e.at("title").get<std::string>();
        entry.snippet = e.value("snippet", std::string());
        entry.locator = e.at("locator").get<std::string>();
        if (e.contains("keywords")) {
            entry.keywords = e["keywords"].get<std::vector<std::string>>();
        }
        entries.push_back(std::move(entry));
    }
    return MemoryKnowledgeSource(doc.value("name", std::string("file")), std::move(entries));
}

MemoryKnowledgeSource MemoryKnowledgeSource::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read knowledge file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(json::parse(buf.str()));
}

MemoryKnowledgeSource MemoryKnowledgeSource::builtin() {
    return from_json(json::parse(embedded::kKnowledgeBaseJson));
}

}  // namespace mcpscan
