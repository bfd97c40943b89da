#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcpscan/client.hpp"

namespace mcpscan {

/// Attack-relevant power of a tool, abstracted from its concrete API.
enum class CapabilityTag {
    FILE_READ,
    FILE_WRITE,
    FILE_EDIT,
    DIR_MODIFY,
    ENV_READ,
    MESSAGING_SEND,
    MESSAGING_READ,
    RETRIEVAL_ADD,
    RETRIEVAL_QUERY,
    EXEC_HINT,
    NETWORK_HINT,
    UNKNOWN,
};

enum class AttackClass { MCE, RAC, CT, RADE_CHAIN, EXFIL_CHAIN };
enum class Severity { CRITICAL, HIGH, MEDIUM, LOW };
enum class Provenance { RULE, AGENT };

std::string to_string(CapabilityTag tag);
std::string to_string(AttackClass cls);
std::string to_string(Severity sev);
std::string to_string(Provenance prov);
CapabilityTag capability_from_string(const std::string& s);
AttackClass attack_class_from_string(const std::string& s);
Severity severity_from_string(const std::string& s);
Provenance provenance_from_string(const std::string& s);

/// Severity is a function of the attack class; the catalog may override it
/// per rule.
Severity severity_for(AttackClass cls);

struct Trigger {
    enum class Kind { Single, Chain };
    Kind kind = Kind::Single;
    std::set<CapabilityTag> any_of;        // Single: fires per server
    std::set<CapabilityTag> chain_first;   // Chain: source capability
    std::set<CapabilityTag> chain_second;  // Chain: sink capability
};

struct Rule {
    std::string id;
    AttackClass attack_class = AttackClass::MCE;
    Severity severity = Severity::CRITICAL;
    Trigger trigger;
    std::string description_template;
    std::string example_template;
    std::vector<std::string> remediations;
    std::vector<std::string> references;
};

struct CapabilityCatalog {
    std::map<std::string, std::set<CapabilityTag>> exact;
    // Ordered fallback patterns matched case-insensitively against
    // name + description.
    std::vector<std::pair<std::string, std::set<CapabilityTag>>> keywords;
};

struct RuleCatalog {
    CapabilityCatalog capabilities;
    std::vector<Rule> rules;
};

struct Implicated {
    std::string server;
    std::string tool;

    auto operator<=>(const Implicated&) const = default;
};

struct Finding {
    std::string finding_id;  // stable hash of (rule id, sorted implicated)
    AttackClass attack_class = AttackClass::MCE;
    Severity severity = Severity::CRITICAL;
    std::vector<Implicated> implicated;  // sorted, non-empty
    std::string description;
    std::string example;
    std::vector<std::string> remediations;
    std::vector<std::string> references;
    Provenance provenance = Provenance::RULE;

    bool operator==(const Finding&) const = default;
};

/// The embedded catalog: exact tags for the known stock-server tools plus
/// keyword fallbacks, and the stock detection rules.
const RuleCatalog& builtin_catalog();

/// The stock detection rules (MCE, RAC, CT x2, exfiltration and
/// retrieval-deception chains).
std::vector<Rule> default_catalog();

RuleCatalog parse_catalog(const nlohmann::json& doc);
RuleCatalog load_catalog_file(const std::filesystem::path& path);

/// Two-layer classification: exact name lookup first, keyword heuristics over
/// name + description as fallback, UNKNOWN when nothing matches. Total & pure.
std::set<CapabilityTag> classify_tool(const ToolDescriptor& tool);
std::set<CapabilityTag> classify_tool(const ToolDescriptor& tool,
                                      const CapabilityCatalog& catalog);

std::string make_finding_id(const std::string& key, const std::vector<Implicated>& implicated);

void sort_findings(std::vector<Finding>& findings);

/// Fires every satisfied rule over the enumerated features. Deterministic:
/// output (ordering and ids included) is invariant under permutation of the
/// input, and monotone in the feature set.
std::vector<Finding> evaluate_rules(const std::vector<ServerFeatures>& features,
                                    const RuleCatalog& catalog = builtin_catalog());

}  // namespace mcpscan
