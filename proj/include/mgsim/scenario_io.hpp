#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "mgsim/engine.hpp"

namespace mgsim {

// Strict JSON reader: unknown keys and wrong types are errors naming the
// field path; syntax errors carry line and column.
ScenarioSpec parse_scenario(const std::string& text);
ScenarioSpec load_scenario(const std::filesystem::path& path);

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& spec);
void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);

}  // namespace mgsim
