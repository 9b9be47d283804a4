#include <map>
#include <string>
#include <vector>

#include "gnsfde/error.hpp"
#include "gnsfde/runner.hpp"

namespace gnsfde {

namespace {

const std::map<std::string, const char*>& presets() {
    static const std::map<std::string, const char*> table{
        {"paper-fig1", R"({
  "command": "gnormal",
  "config": {"gnormal": {"output": "density",
                         "pairs": [[0.8, 1.0], [0.8, 1.1], [0.8, 1.2], [0.8, 1.3]]}}
})"},
        {"paper-fig2", R"({
  "command": "gnormal",
  "config": {"gnormal": {"output": "cdf",
                         "pairs": [[0.8, 1.0], [0.8, 1.1], [0.8, 1.2], [0.8, 1.3]]}}
})"},
        {"paper-fig3", R"({
  "command": "gnormal",
  "config": {"gnormal": {"output": "density",
                         "pairs": [[0.5, 1.3], [0.6, 1.3], [0.7, 1.3], [0.8, 1.3]]}}
})"},
        {"paper-fig4", R"({
  "command": "gnormal",
  "config": {"gnormal": {"output": "cdf",
                         "pairs": [[0.5, 1.3], [0.6, 1.3], [0.7, 1.3], [0.8, 1.3]]}}
})"},
        {"paper-fig5", R"({
  "command": "nsfde-sim",
  "config": {"vol": {"sigma_min": 0.65, "sigma_max": 1.0},
             "initial": {"kind": "random_bm"}, "paths": 20}
})"},
        {"paper-fig6", R"({
  "command": "nsfde-sim",
  "config": {"vol": {"sigma_min": 0.65, "sigma_max": 3.0},
             "initial": {"kind": "random_bm"}, "paths": 20}
})"},
        {"paper-fig7", R"({
  "command": "nsfde-sim",
  "config": {"vol": {"sigma_min": 0.65, "sigma_max": 1.0},
             "initial": {"kind": "exp"}, "paths": 20}
})"},
        {"paper-fig8", R"({
  "command": "nsfde-sim",
  "config": {"vol": {"sigma_min": 0.65, "sigma_max": 1.0},
             "initial": {"kind": "spread", "lo": -0.2, "hi": 0.2}, "paths": 20}
})"},
        {"chattering-example", R"({
  "command": "chattering",
  "config": {"grid": {"tau": 0.1, "T": 1.0, "steps": 1408},
             "coefficients": {"b": {"kind": "integral", "scale": 10.0, "coupling": {"c2": 1.0}}},
             "initial": {"kind": "constant", "value": 1.0},
             "control": {"atoms": [-1.0, 1.0], "weights": [[0.5, 0.5], [0.5, 0.5]]},
             "chattering": {"ns": [2, 8, 32]},
             "cost": {"q": 1.0, "p": 1.0, "clamp_running": 1000.0, "clamp_terminal": 1000.0},
             "family": {"switchers": 2},
             "samples": 200}
})"},
        {"relaxation-affine", R"({
  "command": "control-opt",
  "config": {"grid": {"tau": 0.1, "T": 1.0, "steps": 110},
             "coefficients": {"b": {"kind": "integral", "scale": 10.0, "coupling": {"c2": 1.0}}},
             "initial": {"kind": "constant", "value": 1.0},
             "control": {"atoms": [-1.0, 0.0, 1.0], "blocks": 4, "resolution": 2, "chatter_n": 0},
             "cost": {"q": 1.0, "lin": 0.5, "clamp_running": 1000.0, "clamp_terminal": 1000.0},
             "family": {"switchers": 2},
             "samples": 32}
})"},
        {"relaxation-gap", R"({
  "command": "control-opt",
  "config": {"grid": {"tau": 0.0, "T": 1.0, "steps": 1024},
             "coefficients": {"Q": {"kind": "zero"},
                              "b": {"kind": "zero", "coupling": {"c2": 1.0}},
                              "gamma": {"kind": "zero"},
                              "sigma": {"kind": "zero"}},
             "initial": {"kind": "constant", "value": 0.0},
             "control": {"atoms": [-1.0, 1.0], "blocks": 4, "resolution": 2, "chatter_n": 32},
             "cost": {"q": 1.0, "clamp_running": 1000.0},
             "family": {"switchers": 0},
             "samples": 1}
})"},
    };
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, body] : presets()) out.push_back(name);
    return out;
}

std::string preset_json(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) throw config_error("unknown preset '" + name + "'", "preset");
    return it->second;
}

}  // namespace gnsfde
