#include "mcpscan/rules.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mcpscan/embedded_data.hpp"
#include "mcpscan/util.hpp"

namespace mcpscan {

using nlohmann::json;

namespace {

const std::map<std::string, CapabilityTag> kTagNames = {
    {"FILE_READ", CapabilityTag::FILE_READ},
    {"FILE_WRITE", CapabilityTag::FILE_WRITE},
    {"FILE_EDIT", CapabilityTag::FILE_EDIT},
    {"DIR_MODIFY", CapabilityTag::DIR_MODIFY},
    {"ENV_READ", CapabilityTag::ENV_READ},
    {"MESSAGING_SEND", CapabilityTag::MESSAGING_SEND},
    {"MESSAGING_READ", CapabilityTag::MESSAGING_READ},
    {"RETRIEVAL_ADD", CapabilityTag::RETRIEVAL_ADD},
    {"RETRIEVAL_QUERY", CapabilityTag::RETRIEVAL_QUERY},
    {"EXEC_HINT", CapabilityTag::EXEC_HINT},
    {"NETWORK_HINT", CapabilityTag::NETWORK_HINT},
    {"UNKNOWN", CapabilityTag::UNKNOWN},
};

template <typename Enum>
std::string enum_name(Enum value, const std::map<std::string, Enum>& names) {
    for (const auto& [name, v] : names) {
        if (v == value) return name;
    }
    return "?";
}

const std::map<std::string, AttackClass> kClassNames = {
    {"MCE", AttackClass::MCE},
    {"RAC", AttackClass::RAC},
    {"CT", AttackClass::CT},
    {"RADE_CHAIN", AttackClass::RADE_CHAIN},
    {"EXFIL_CHAIN", AttackClass::EXFIL_CHAIN},
};

const std::map<std::string, Severity> kSeverityNames = {
    {"CRITICAL", Severity::CRITICAL},
    {"HIGH", Severity::HIGH},
    {"MEDIUM", Severity::MEDIUM},
    {"LOW", Severity::LOW},
};

const std::map<std::string, Provenance> kProvenanceNames = {
    {"RULE", Provenance::RULE},
    {"AGENT", Provenance::AGENT},
};

std::set<CapabilityTag> parse_tag_set(const json& arr) {
    std::set<CapabilityTag> tags;
    for (const auto& t : arr) tags.insert(capability_from_string(t.get<std::string>()));
    return tags;
}

std::string replace_all(std::string text, std::string_view placeholder, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
    return text;
}

std::vector<std::string> tool_names(const std::vector<Implicated>& implicated,
                                    const std::string& server) {
    std::vector<std::string> names;
    for (const auto& i : implicated) {
        if (i.server == server) names.push_back(i.tool);
    }
    return names;
}

std::string render_single(const std::string& tpl, const std::string& server,
                          const std::vector<std::string>& tools) {
    std::string out = replace_all(tpl, "{server}", server);
    out = replace_all(out, "{tools}", join(tools, ", "));
    out = replace_all(out, "{tool}", tools.empty() ? "" : tools.front());
    return out;
}

std::string render_chain(const std::string& tpl, const std::string& first_server,
                         const std::vector<std::string>& first_tools,
                         const std::string& second_server,
                         const std::vector<std::string>& second_tools) {
    std::string out = replace_all(tpl, "{first_server}", first_server);
    out = replace_all(out, "{second_server}", second_server);
    out = replace_all(out, "{first_tools}", join(first_tools, ", "));
    out = replace_all(out, "{second_tools}", join(second_tools, ", "));
    out = replace_all(out, "{first_tool}", first_tools.empty() ? "" : first_tools.front());
    out = replace_all(out, "{second_tool}", second_tools.empty() ? "" : second_tools.front());
    return out;
}

bool intersects(const std::set<CapabilityTag>& a, const std::set<CapabilityTag>& b) {
    for (auto tag : a) {
        if (b.count(tag)) return true;
    }
    return false;
}

struct ClassifiedServer {
    std::string name;
    std::vector<std::pair<std::string, std::set<CapabilityTag>>> tools;  // name -> tags

    std::vector<std::string> tools_with_any(const std::set<CapabilityTag>& wanted) const {
        std::vector<std::string> out;
        for (const auto& [tool, tags] : tools) {
            if (intersects(tags, wanted)) out.push_back(tool);
        }
        return out;
    }
};

}  // namespace

std::string to_string(CapabilityTag tag) { return enum_name(tag, kTagNames); }
std::string to_string(AttackClass cls) { return enum_name(cls, kClassNames); }
std::string to_string(Severity sev) { return enum_name(sev, kSeverityNames); }
std::string to_string(Provenance prov) { return enum_name(prov, kProvenanceNames); }

namespace {
template <typename Enum>
Enum enum_value(const std::string& s, const std::map<std::string, Enum>& names,
                const char* what) {
    auto it = names.find(s);
    if (it == names.end()) throw std::invalid_argument(std::string("unknown ") + what + ": " + s);
    return it->second;
}
}  // namespace

CapabilityTag capability_from_string(const std::string& s) {
    return enum_value(s, kTagNames, "capability tag");
}
AttackClass attack_class_from_string(const std::string& s) {
    return enum_value(s, kClassNames, "attack class");
}
Severity severity_from_string(const std::string& s) {
    return enum_value(s, kSeverityNames, "severity");
}
Provenance provenance_from_string(const std::string& s) {
    return enum_value(s, kProvenanceNames, "provenance");
}

Severity severity_for(AttackClass cls) {
    switch (cls) {
        case AttackClass::MCE:
        case AttackClass::RAC:
        case AttackClass::RADE_CHAIN:
        case AttackClass::EXFIL_CHAIN:
            return Severity::CRITICAL;
        case AttackClass::CT:
            return Severity::HIGH;
    }
    return Severity::MEDIUM;
}

RuleCatalog parse_catalog(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("catalog must be a JSON object");

    RuleCatalog catalog;
    if (doc.contains("capabilities")) {
        const json& caps = doc["capabilities"];
        if (caps.contains("exact")) {
            for (const auto& [name, tags] : caps["exact"].items()) {
                catalog.capabilities.exact[name] = parse_tag_set(tags);
            }
        }
        if (caps.contains("keywords")) {
            for (const auto& kw : caps["keywords"]) {
                catalog.capabilities.keywords.emplace_back(kw["pattern"].get<std::string>(),
                                                           parse_tag_set(kw["tags"]));
            }
        }
    }

    std::set<std::string> seen_ids;
    for (const auto& r : doc.value("rules", json::array())) {
        Rule rule;
        rule.id = r.at("id").get<std::string>();
        if (!seen_ids.insert(rule.id).second) {
            throw std::invalid_argument("duplicate rule id: " + rule.id);
        }
        rule.attack_class = attack_class_from_string(r.at("attack_class").get<std::string>());
        rule.severity = r.contains("severity")
                            ? severity_from_string(r["severity"].get<std::string>())
                            : severity_for(rule.attack_class);

        const json& trig = r.at("trigger");
        const std::string kind = trig.at("kind").get<std::string>();
        if (kind == "single") {
            rule.trigger.kind = Trigger::Kind::Single;
            rule.trigger.any_of = parse_tag_set(trig.at("any_of"));
        } else if (kind == "chain") {
            rule.trigger.kind = Trigger::Kind::Chain;
            rule.trigger.chain_first = parse_tag_set(trig.at("first"));
            rule.trigger.chain_second = parse_tag_set(trig.at("second"));
        } else {
            throw std::invalid_argument("unknown trigger kind: " + kind);
        }

        rule.description_template = r.at("description_template").get<std::string>();
        rule.example_template = r.at("example_template").get<std::string>();
        rule.remediations = r.at("remediations").get<std::vector<std::string>>();
        if (rule.remediations.empty()) {
            throw std::invalid_argument("rule " + rule.id + " has no remediations");
        }
        if (r.contains("references")) {
            rule.references = r["references"].get<std::vector<std::string>>();
        }
        catalog.rules.push_back(std::move(rule));
    }
    return catalog;
}

RuleCatalog load_catalog_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read catalog file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_catalog(json::parse(buf.str()));
}

const RuleCatalog& builtin_catalog() {
    static const RuleCatalog catalog = parse_catalog(json::parse(embedded::kDefaultCatalogJson));
    return catalog;
}

std::vector<Rule> default_catalog() { return builtin_catalog().rules; }

std::set<CapabilityTag> classify_tool(const ToolDescriptor& tool) {
    return classify_tool(tool, builtin_catalog().capabilities);
}

std::set<CapabilityTag> classify_tool(const ToolDescriptor& tool,
                                      const CapabilityCatalog& catalog) {
    auto it = catalog.exact.find(tool.name);
    if (it != catalog.exact.end()) return it->second;

    std::set<CapabilityTag> tags;
    const std::string text = to_lower(tool.name) + " " + to_lower(tool.description);
    for (const auto& [pattern, kw_tags] : catalog.keywords) {
        if (text.find(to_lower(pattern)) != std::string::npos) {
            tags.insert(kw_tags.begin(), kw_tags.end());
        }
    }
    if (tags.empty()) tags.insert(CapabilityTag::UNKNOWN);
    return tags;
}

std::string make_finding_id(const std::string& key, const std::vector<Implicated>& implicated) {
    std::string material = key;
    std::vector<Implicated> sorted = implicated;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& i : sorted) {
        material += "|" + i.server + ":" + i.tool;
    }
    return to_hex64(fnv1a64(material));
}

void sort_findings(std::vector<Finding>& findings) {
    std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        if (a.severity != b.severity) return a.severity < b.severity;  // CRITICAL first
        return a.finding_id < b.finding_id;
    });
}

std::vector<Finding> evaluate_rules(const std::vector<ServerFeatures>& features,
                                    const RuleCatalog& catalog) {
    // Classification pass; servers ordered by name so evaluation is
    // permutation-invariant.
    std::vector<ClassifiedServer> servers;
    for (const auto& f : features) {
        ClassifiedServer server;
        server.name = f.server_name;
        for (const auto& tool : f.tools) {
            server.tools.emplace_back(tool.name, classify_tool(tool, catalog.capabilities));
        }
        servers.push_back(std::move(server));
    }
    std::sort(servers.begin(), servers.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });

    std::vector<Finding> findings;
    for (const auto& rule : catalog.rules) {
        if (rule.trigger.kind == Trigger::Kind::Single) {
            for (const auto& server : servers) {
                auto matched = server.tools_with_any(rule.trigger.any_of);
                if (matched.empty()) continue;

                Finding finding;
                finding.attack_class = rule.attack_class;
                finding.severity = rule.severity;
                for (const auto& tool : matched) finding.implicated.push_back({server.name, tool});
                std::sort(finding.implicated.begin(), finding.implicated.end());
                finding.finding_id = make_finding_id(rule.id, finding.implicated);
                finding.description = render_single(rule.description_template, server.name,
                                                    tool_names(finding.implicated, server.name));
                finding.example = render_single(rule.example_template, server.name,
                                                tool_names(finding.implicated, server.name));
                finding.remediations = rule.remediations;
                finding.references = rule.references;
                finding.provenance = Provenance::RULE;
                findings.push_back(std::move(finding));
            }
        } else {
            // Chain rules consider every ordered (source, sink) server pair,
            // the same server included.
            for (const auto& first : servers) {
                auto first_tools = first.tools_with_any(rule.trigger.chain_first);
                if (first_tools.empty()) continue;
                for (const auto& second : servers) {
                    auto second_tools = second.tools_with_any(rule.trigger.chain_second);
                    if (second_tools.empty()) continue;

                    Finding finding;
                    finding.attack_class = rule.attack_class;
                    finding.severity = rule.severity;
                    for (const auto& tool : first_tools)
                        finding.implicated.push_back({first.name, tool});
                    for (const auto& tool : second_tools)
                        finding.implicated.push_back({second.name, tool});
                    std::sort(finding.implicated.begin(), finding.implicated.end());
                    finding.implicated.erase(
                        std::unique(finding.implicated.begin(), finding.implicated.end()),
                        finding.implicated.end());
                    finding.finding_id = make_finding_id(
                        rule.id + "|" + first.name + ">" + second.name, finding.implicated);

                    std::sort(first_tools.begin(), first_tools.end());
                    std::sort(second_tools.begin(), second_tools.end());
                    finding.description =
                        render_chain(rule.description_template, first.name, first_tools,
                                     second.name, second_tools);
                    finding.example = render_chain(rule.example_template, first.name, first_tools,
                                                   second.name, second_tools);
                    finding.remediations = rule.remediations;
                    finding.references = rule.references;
                    finding.provenance = Provenance::RULE;
                    findings.push_back(std::move(finding));
                }
            }
        }
    }

    sort_findings(findings);
    return findings;
}

}  // namespace mcpscan
