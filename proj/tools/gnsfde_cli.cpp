// Command-line front end over the C API.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gnsfde/gnsfde.h"

namespace {

using json = nlohmann::json;

std::string quoted(const std::string& s) { return json(s).dump(); }

int report(gn_status st) {
    std::string line = std::string("gnsfde: error kind=") + gn_status_string(st);
    if (*gn_last_error_field()) line += std::string(" field=") + gn_last_error_field();
    if (gn_last_error_step() >= 0) line += " step=" + std::to_string(gn_last_error_step());
    line += " message=" + quoted(gn_last_error());
    std::cerr << line << '\n';
    switch (st) {
        case GN_OK: return 0;
        case GN_ERR_STEP:
        case GN_ERR_DIVERGENCE:
        case GN_ERR_ESTIMATION: return 3;
        case GN_ERR_INTERNAL: return 1;
        default: return 2;
    }
}

int usage_failure(const std::string& field, const std::string& message) {
    std::cerr << "gnsfde: error kind=usage field=" << field << " message=" << quoted(message) << '\n';
    return 2;
}

// "a.b.c=value": value is parsed as JSON when possible, otherwise kept as a string.
bool apply_set(json& overrides, const std::string& assignment, std::string& error) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        error = "expected key=value, got '" + assignment + "'";
        return false;
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &overrides;
    std::size_t pos = 0;
    for (;;) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty()) {
            error = "empty key segment in '" + key + "'";
            return false;
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return true;
        }
        if (!(*node)[part].is_object()) (*node)[part] = json::object();
        node = &(*node)[part];
        pos = dot + 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sublinear-expectation and neutral stochastic delay equation laboratory"};
    app.set_version_flag("--version", std::string(gn_version()));

    std::string command;
    std::string config_path;
    std::string preset;
    std::string out_dir = ".";
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::size_t steps = 0;
    bool print_config = false;
    bool list = false;

    app.add_option("command", command, "Command to run")->check(CLI::IsMember([] {
        std::vector<std::string> names;
        std::string all = gn_command_names();
        for (std::size_t p = 0; p < all.size();) {
            const auto nl = all.find('\n', p);
            names.push_back(all.substr(p, nl - p));
            p = nl + 1;
        }
        return names;
    }()));
    app.add_option("-c,--config", config_path, "JSON config file");
    app.add_option("-p,--preset", preset, "Named preset");
    auto* seed_opt = app.add_option("--seed", seed, "Root seed");
    auto* samples_opt = app.add_option("--samples", samples, "Monte-Carlo samples per policy")->check(CLI::PositiveNumber);
    auto* steps_opt = app.add_option("--steps", steps, "Total grid steps N")->check(CLI::PositiveNumber);
    app.add_option("-o,--out-dir", out_dir, "Output directory");
    app.add_option("--set", sets, "Override a config value, e.g. --set vol.sigma_max=3");
    app.add_flag("--print-config", print_config, "Print the effective config and exit");
    app.add_flag("--list-presets", list, "List preset names and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return usage_failure("argv", e.what());
    }

    if (list) {
        std::cout << gn_preset_names();
        return 0;
    }
    if (command.empty()) return usage_failure("command", "a command is required (see --help)");

    json overrides = json::object();
    if (*seed_opt) overrides["seed"] = seed;
    if (*samples_opt) overrides["samples"] = samples;
    if (*steps_opt) overrides["grid"]["steps"] = steps;
    for (const auto& s : sets) {
        std::string error;
        if (!apply_set(overrides, s, error)) return usage_failure("--set", error);
    }
    const std::string over = overrides.dump();
    const char* cfg = config_path.empty() ? nullptr : config_path.c_str();
    const char* pre = preset.empty() ? nullptr : preset.c_str();

    if (print_config) {
        std::size_t needed = 0;
        gn_status st = gn_effective_config(command.c_str(), cfg, pre, over.c_str(), nullptr, 0, &needed);
        if (st != GN_OK) return report(st);
        std::string text(needed, '\0');
        st = gn_effective_config(command.c_str(), cfg, pre, over.c_str(), text.data(), text.size(), &needed);
        if (st != GN_OK) return report(st);
        text.resize(needed - 1);
        std::cout << text << '\n';
        return 0;
    }

    const gn_status st = gn_run_command(command.c_str(), cfg, pre, over.c_str(), out_dir.c_str());
    return st == GN_OK ? 0 : report(st);
}
