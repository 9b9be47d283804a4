#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gnsfde {

/// One CLI-style invocation. Layers, later wins: built-in defaults for the
/// command, the preset, the config file, then `overrides` (a JSON object).
struct RunRequest {
    std::string command;
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::string overrides = "{}";
    std::string out_dir = ".";
};

struct RunResult {
    std::string effective_config;  // pretty JSON, as echoed to config.json
    std::vector<std::string> files;
};

/// Commands understood by run().
std::vector<std::string> run_commands();
/// Names of the built-in presets.
std::vector<std::string> preset_names();
/// Preset body as JSON text; throws a config error for unknown names.
std::string preset_json(const std::string& name);

/// Effective configuration for a request without running it.
std::string effective_config(const RunRequest& request);

/// Run the command and write its CSV files and config echo into out_dir.
/// Throws gnsfde::Error on invalid configuration or numerical failure.
RunResult run(const RunRequest& request);

}  // namespace gnsfde
