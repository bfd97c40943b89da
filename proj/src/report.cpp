#include "mcpscan/report.hpp"

#include <sstream>
#include <stdexcept>

#include "mcpscan/embedded_data.hpp"
#include "mcpscan/util.hpp"

namespace mcpscan {

using ordered_json = nlohmann::ordered_json;

std::string to_string(ScanMode mode) {
    return mode == ScanMode::Offline ? "OFFLINE" : "AGENTIC";
}

ScanMode scan_mode_from_string(const std::string& s) {
    if (s == "OFFLINE") return ScanMode::Offline;
    if (s == "AGENTIC") return ScanMode::Agentic;
    throw std::invalid_argument("unknown scan mode: " + s);
}

namespace {

std::string implicated_label(const Finding& finding) {
    std::vector<std::string> parts;
    for (const auto& i : finding.implicated) parts.push_back(i.server + ":" + i.tool);
    return join(parts, ", ");
}

}  // namespace

std::string render_markdown(const ScanReport& report) {
    std::ostringstream md;
    md << "# MCP Server Security Scan Report\n\n";
    md << "- Created: " << report.created_at << "\n";
    md << "- Config digest: `" << report.config_digest << "`\n";
    md << "- Mode: " << to_string(report.mode) << "\n";
    md << "- Findings: " << report.findings.size() << "\n\n";

    md << "## Server Inventory\n\n";
    if (report.servers.empty()) {
        md << "No servers were scanned.\n\n";
    }
    for (const auto& server : report.servers) {
        md << "### " << server.name << "\n\n";
        if (!server.protocol_info.server_name.empty()) {
            md << "- Reports as: " << server.protocol_info.server_name;
            if (!server.protocol_info.server_version.empty()) {
                md << " " << server.protocol_info.server_version;
            }
            md << "\n";
        }
        if (!server.protocol_info.protocol_version.empty()) {
            md << "- Protocol: " << server.protocol_info.protocol_version << "\n";
        }
        md << "- Tools: " << server.tool_count << ", resources: " << server.resource_count
           << ", prompts: " << server.prompt_count << "\n";
        for (const auto& warning : server.warnings) {
            md << "- Warning: " << warning << "\n";
        }
        md << "\n";
    }

    md << "## Findings\n\n";
    if (report.findings.empty()) {
        md << "No findings. The scanned servers expose no capability matched by the active "
              "rule catalog.\n\n";
    }
    std::size_t index = 1;
    for (const auto& finding : report.findings) {
        md << "### " << index++ << ". " << to_string(finding.attack_class) << " ["
           << to_string(finding.severity) << "] — " << implicated_label(finding) << "\n\n";
        md << finding.description << "\n\n";
        md << "Example:\n\n```\n" << finding.example << "\n```\n\n";
        md << "Remediations:\n\n";
        std::size_t step = 1;
        for (const auto& remediation : finding.remediations) {
            md << step++ << ". " << remediation << "\n";
        }
        if (!finding.references.empty()) {
            md << "\nReferences: " << join(finding.references, "; ") << "\n";
        }
        md << "\n(id: `" << finding.finding_id << "`, provenance: "
           << to_string(finding.provenance) << ")\n\n";
    }

    if (!report.degraded_warnings.empty()) {
        md << "## Degraded Results\n\n";
        for (const auto& warning : report.degraded_warnings) {
            md << "- " << warning << "\n";
        }
        md << "\n";
    }

    md << "## Summary\n\n";
    if (report.findings.empty()) {
        md << "No findings.\n";
    } else {
        md << "| Attack | Description | Remediation |\n";
        md << "|---|---|---|\n";
        for (const auto& finding : report.findings) {
            std::string desc = finding.description;
            for (auto& c : desc) {
                if (c == '|') c = '/';
                if (c == '\n') c = ' ';
            }
            std::string rem = join(finding.remediations, " ");
            for (auto& c : rem) {
                if (c == '|') c = '/';
                if (c == '\n') c = ' ';
            }
            md << "| " << to_string(finding.attack_class) << " | " << desc << " | " << rem
               << " |\n";
        }
    }
    return md.str();
}

namespace {

ordered_json finding_to_json(const Finding& finding) {
    ordered_json j;
    j["finding_id"] = finding.finding_id;
    j["attack_class"] = to_string(finding.attack_class);
    j["severity"] = to_string(finding.severity);
    j["implicated"] = ordered_json::array();
    for (const auto& i : finding.implicated) {
        j["implicated"].push_back({{"server", i.server}, {"tool", i.tool}});
    }
    j["description"] = finding.description;
    j["example"] = finding.example;
    j["remediations"] = finding.remediations;
    j["references"] = finding.references;
    j["provenance"] = to_string(finding.provenance);
    return j;
}

Finding finding_from_json(const nlohmann::json& j) {
    Finding finding;
    finding.finding_id = j.at("finding_id").get<std::string>();
    finding.attack_class = attack_class_from_string(j.at("attack_class").get<std::string>());
    finding.severity = severity_from_string(j.at("severity").get<std::string>());
    for (const auto& i : j.at("implicated")) {
        finding.implicated.push_back(
            {i.at("server").get<std::string>(), i.at("tool").get<std::string>()});
    }
    finding.description = j.at("description").get<std::string>();
    finding.example = j.at("example").get<std::string>();
    finding.remediations = j.at("remediations").get<std::vector<std::string>>();
    finding.references = j.at("references").get<std::vector<std::string>>();
    finding.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    return finding;
}

}  // namespace

std::string render_json(const ScanReport& report) {
    ordered_json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["created_at"] = report.created_at;
    doc["config_digest"] = report.config_digest;
    doc["mode"] = to_string(report.mode);
    doc["servers"] = ordered_json::array();
    for (const auto& server : report.servers) {
        ordered_json s;
        s["name"] = server.name;
        s["protocol_info"] = {{"server_name", server.protocol_info.server_name},
                              {"server_version", server.protocol_info.server_version},
                              {"protocol_version", server.protocol_info.protocol_version}};
        s["tool_count"] = server.tool_count;
        s["resource_count"] = server.resource_count;
        s["prompt_count"] = server.prompt_count;
        s["warnings"] = server.warnings;
        doc["servers"].push_back(std::move(s));
    }
    doc["findings"] = ordered_json::array();
    for (const auto& finding : report.findings) {
        doc["findings"].push_back(finding_to_json(finding));
    }
    doc["degraded_warnings"] = report.degraded_warnings;
    return doc.dump(2) + "\n";
}

ScanReport parse_report_json(std::string_view text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.at("schema_version").get<int>() != kReportSchemaVersion) {
        throw std::invalid_argument("unsupported report schema version");
    }

    ScanReport report;
    report.created_at = doc.at("created_at").get<std::string>();
    report.config_digest = doc.at("config_digest").get<std::string>();
    report.mode = scan_mode_from_string(doc.at("mode").get<std::string>());
    for (const auto& s : doc.at("servers")) {
        ServerSummary summary;
        summary.name = s.at("name").get<std::string>();
        const auto& info = s.at("protocol_info");
        summary.protocol_info.server_name = info.at("server_name").get<std::string>();
        summary.protocol_info.server_version = info.at("server_version").get<std::string>();
        summary.protocol_info.protocol_version = info.at("protocol_version").get<std::string>();
        summary.tool_count = s.at("tool_count").get<std::size_t>();
        summary.resource_count = s.at("resource_count").get<std::size_t>();
        summary.prompt_count = s.at("prompt_count").get<std::size_t>();
        summary.warnings = s.at("warnings").get<std::vector<std::string>>();
        report.servers.push_back(std::move(summary));
    }
    for (const auto& f : doc.at("findings")) {
        report.findings.push_back(finding_from_json(f));
    }
    report.degraded_warnings = doc.at("degraded_warnings").get<std::vector<std::string>>();
    return report;
}

std::string report_schema_json() { return embedded::kReportSchemaJson; }

}  // namespace mcpscan
