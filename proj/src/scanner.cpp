#include "mcpscan/scanner.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include "mcpscan/util.hpp"

namespace mcpscan {

namespace {

struct ServerOutcome {
    ServerSummary summary;
    std::optional<ServerFeatures> features;
};

ServerOutcome scan_one_server(const ServerSpec& spec, const ScanSettings& settings) {
    ServerOutcome outcome;
    outcome.summary.name = spec.name;

    ConnectOptions options;
    options.timeout = settings.per_server_timeout;
    options.kill_grace = settings.kill_grace;
    options.env_mode = settings.env_mode;
    options.redaction = settings.redaction;

    try {
        Session session = Session::connect(spec, options);
        ServerFeatures features = session.enumerate_features();
        outcome.summary.protocol_info = session.protocol_info();
        outcome.summary.tool_count = features.tools.size();
        outcome.summary.resource_count = features.resources.size();
        outcome.summary.prompt_count = features.prompts.size();
        outcome.summary.warnings = session.warnings();
        outcome.features = std::move(features);
        session.close();
    } catch (const LaunchError& e) {
        outcome.summary.warnings.push_back(std::string("launch failed: ") + e.what());
    } catch (const TimeoutError& e) {
        outcome.summary.warnings.push_back(std::string("timed out: ") + e.what());
    } catch (const ProtocolError& e) {
        outcome.summary.warnings.push_back(std::string("protocol error: ") + e.what());
    } catch (const SessionError& e) {
        outcome.summary.warnings.push_back(std::string("session error: ") + e.what());
    }
    return outcome;
}

}  // namespace

ScanReport run_scan(const ScanConfig& config, const ScanSettings& settings) {
    const RuleCatalog& catalog = settings.catalog ? *settings.catalog : builtin_catalog();

    // Scan servers concurrently; results land in config order.
    std::vector<ServerOutcome> outcomes(config.servers.size());
    std::size_t workers = settings.parallelism > 0
                              ? std::min(settings.parallelism, config.servers.size())
                              : config.servers.size();
    if (workers == 0) workers = 1;

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t index = next.fetch_add(1);
                if (index >= config.servers.size()) return;
                outcomes[index] = scan_one_server(config.servers[index], settings);
            }
        });
    }
    for (auto& t : pool) t.join();

    std::vector<ServerFeatures> all_features;
    for (const auto& outcome : outcomes) {
        if (outcome.features.has_value()) all_features.push_back(*outcome.features);
    }

    std::vector<Finding> findings = evaluate_rules(all_features, catalog);

    ScanReport report;
    report.created_at = settings.created_at.empty() ? iso8601_utc_now() : settings.created_at;
    report.config_digest = config.source_digest;
    report.mode = settings.model ? ScanMode::Agentic : ScanMode::Offline;

    if (settings.model) {
        AgentPipelineResult agentic = run_agent_pipeline(
            all_features, *settings.model, settings.knowledge, settings.probe_rounds, findings);
        findings = std::move(agentic.findings);
        report.degraded_warnings = std::move(agentic.warnings);
    }

    for (auto& outcome : outcomes) {
        // Servers whose every tool is unclassifiable get an informational note.
        if (outcome.features.has_value() && !outcome.features->tools.empty()) {
            bool all_unknown = std::all_of(
                outcome.features->tools.begin(), outcome.features->tools.end(),
                [&](const ToolDescriptor& tool) {
                    auto tags = classify_tool(tool, catalog.capabilities);
                    return tags.size() == 1 && *tags.begin() == CapabilityTag::UNKNOWN;
                });
            if (all_unknown) {
                outcome.summary.warnings.push_back(
                    "note: no attack-relevant capabilities recognized; tools are unclassified");
            }
        }
        report.servers.push_back(std::move(outcome.summary));
    }

    report.findings = std::move(findings);
    return report;
}

}  // namespace mcpscan
