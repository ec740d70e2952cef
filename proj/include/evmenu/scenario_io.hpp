#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "evmenu/model.hpp"

namespace evmenu {

struct ScenarioFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario JSON. Station indices in "preferences" are 1-based; a null
// capacity means unlimited. See README for the full schema.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);

}  // namespace evmenu
