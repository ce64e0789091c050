#pragma once

#include <optional>
#include <string>
#include <vector>

namespace beamforge {

struct Preset {
    std::string name;
    std::string summary;
    std::string json_text;
};

/// Built-in experiment configurations, runnable by name.
const std::vector<Preset>& presets();

std::optional<std::string> preset_json(const std::string& name);

} // namespace beamforge
