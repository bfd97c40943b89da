#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mcpscan/chat_model_http.hpp"
#include "mcpscan/mock_server.hpp"
#include "mcpscan/scanner.hpp"
#include "mcpscan/util.hpp"

namespace {

using namespace mcpscan;

// Exit codes for scan: 0 = no findings, 1 = findings, 2 = scan failed.
constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitFailure = 2;

bool write_output(const std::string& path, const std::string& payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        log_error("cannot write output file: " + path);
        return false;
    }
    out << payload;
    return true;
}

struct ScanArgs {
    std::string config_path;
    std::string output_path;
    std::string format = "both";
    bool offline = false;
    bool agentic = false;
    double timeout_secs = 30.0;
    int rounds = 1;
    std::string catalog_path;
    bool pass_env = false;
    std::size_t parallel = 0;
    std::string now;
    std::vector<std::string> knowledge_paths;
};

int run_scan_command(const ScanArgs& args) {
    ScanConfig config;
    try {
        config = load_config_file(args.config_path);
    } catch (const ConfigError& e) {
        log_error(std::string("config error: ") + e.what());
        return kExitFailure;
    }

    ScanSettings settings;
    settings.per_server_timeout =
        std::chrono::milliseconds(static_cast<std::int64_t>(args.timeout_secs * 1000));
    settings.env_mode = args.pass_env ? EnvMode::PassThrough : EnvMode::Scrubbed;
    settings.parallelism = args.parallel;
    settings.created_at = args.now.empty() ? iso8601_utc_now() : args.now;
    settings.probe_rounds = args.rounds;

    RuleCatalog catalog;
    if (!args.catalog_path.empty()) {
        try {
            catalog = load_catalog_file(args.catalog_path);
        } catch (const std::exception& e) {
            log_error(std::string("catalog error: ") + e.what());
            return kExitFailure;
        }
        settings.catalog = &catalog;
    }

    // Agentic mode needs model credentials up front, before any spawn.
    std::unique_ptr<HttpChatModel> model;
    std::vector<MemoryKnowledgeSource> knowledge_storage;
    if (args.agentic) {
        const char* endpoint = std::getenv(kModelEndpointEnvVar);
        const char* api_key = std::getenv(kModelApiKeyEnvVar);
        if (endpoint == nullptr || *endpoint == '\0' || api_key == nullptr ||
            *api_key == '\0') {
            log_error(std::string("agentic mode requires ") + kModelEndpointEnvVar + " and " +
                      kModelApiKeyEnvVar + " to be set");
            return kExitFailure;
        }
        const char* model_name = std::getenv(kModelNameEnvVar);
        model = std::make_unique<HttpChatModel>(endpoint, api_key,
                                                model_name ? model_name : "gpt-4o");
        settings.model = model.get();

        if (args.knowledge_paths.empty()) {
            knowledge_storage.push_back(MemoryKnowledgeSource::builtin());
        } else {
            for (const auto& path : args.knowledge_paths) {
                try {
                    knowledge_storage.push_back(MemoryKnowledgeSource::from_file(path));
                } catch (const std::exception& e) {
                    log_error(std::string("knowledge error: ") + e.what());
                    return kExitFailure;
                }
            }
        }
        for (auto& source : knowledge_storage) settings.knowledge.push_back(&source);
    }

    log_info("scanning " + std::to_string(config.servers.size()) + " server(s) from " +
             args.config_path);
    ScanReport report = run_scan(config, settings);

    const bool want_md = args.format == "md" || args.format == "both";
    const bool want_json = args.format == "json" || args.format == "both";
    std::string md = want_md ? render_markdown(report) : std::string();
    std::string js = want_json ? render_json(report) : std::string();

    if (args.output_path.empty()) {
        if (want_md) std::cout << md;
        if (want_md && want_json) std::cout << "\n";
        if (want_json) std::cout << js;
    } else if (args.format == "both") {
        if (!write_output(args.output_path + ".md", md)) return kExitFailure;
        if (!write_output(args.output_path + ".json", js)) return kExitFailure;
        log_info("wrote " + args.output_path + ".md and " + args.output_path + ".json");
    } else {
        if (!write_output(args.output_path, want_md ? md : js)) return kExitFailure;
        log_info("wrote " + args.output_path);
    }

    log_info("scan complete: " + std::to_string(report.findings.size()) + " finding(s)");
    return report.findings.empty() ? kExitClean : kExitFindings;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MCP server security scanner"};
    app.require_subcommand(1);

    ScanArgs scan_args;
    auto* scan = app.add_subcommand(
        "scan", "Scan the MCP servers declared in a Claude Desktop style config file");
    scan->add_option("--config", scan_args.config_path, "Path to the JSON config file")
        ->required();
    scan->add_option("--output", scan_args.output_path,
                     "Output path (default stdout; with --format both, writes "
                     "<output>.md and <output>.json)");
    scan->add_option("--format", scan_args.format, "Report format")
        ->check(CLI::IsMember({"md", "json", "both"}))
        ->capture_default_str();
    auto* offline = scan->add_flag("--offline", scan_args.offline,
                                   "Rule-engine only, no model calls (default)");
    scan->add_flag("--agentic", scan_args.agentic,
                   "Also run the model-backed probe/audit pipeline")
        ->excludes(offline);
    scan->add_option("--timeout", scan_args.timeout_secs, "Per-server timeout in seconds")
        ->capture_default_str();
    scan->add_option("--rounds", scan_args.rounds, "Agentic probe rounds (union-merged)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    scan->add_option("--catalog", scan_args.catalog_path, "Override the built-in rule catalog");
    scan->add_flag("--pass-env", scan_args.pass_env,
                   "Pass secret-looking env values through to scanned servers "
                   "(default: scrubbed)");
    scan->add_option("--parallel", scan_args.parallel,
                     "Max servers scanned concurrently (default: all)");
    scan->add_option("--now", scan_args.now,
                     "Timestamp to stamp into the report (ISO-8601; for reproducible output)");
    scan->add_option("--knowledge", scan_args.knowledge_paths,
                     "Knowledge-base JSON file(s) for the agentic auditor");

    std::string profile_name;
    std::string script_name = "none";
    double delay_ms = 0;
    std::size_t page_size = 0;
    std::string protocol_version;
    auto* mock = app.add_subcommand("mock", "Serve a hermetic MCP server fixture on stdio");
    mock->add_option("--profile", profile_name, "filesystem | slack | everything | chroma")
        ->required();
    mock->add_option("--script", script_name, "Scripted fault behavior")
        ->check(CLI::IsMember({"none", "silence", "malformed", "delay"}))
        ->capture_default_str();
    mock->add_option("--delay-ms", delay_ms, "Reply delay for --script delay");
    mock->add_option("--page-size", page_size, "Paginate tool listings at this size");
    mock->add_option("--protocol-version", protocol_version,
                     "Claim this protocol version in the handshake");

    CLI11_PARSE(app, argc, argv);

    if (scan->parsed()) return run_scan_command(scan_args);

    MockProfile profile;
    try {
        profile = load_mock_profile(profile_name);
    } catch (const std::invalid_argument& e) {
        log_error(e.what());
        return kExitFailure;
    }
    MockScript script;
    if (script_name == "silence") script.kind = MockScript::Kind::Silence;
    else if (script_name == "malformed") script.kind = MockScript::Kind::Malformed;
    else if (script_name == "delay") script.kind = MockScript::Kind::Delay;
    script.delay = std::chrono::milliseconds(static_cast<std::int64_t>(delay_ms));
    script.page_size = page_size;
    script.protocol_version_override = protocol_version;

    return serve_mock(profile, std::cin, std::cout, script);
}
