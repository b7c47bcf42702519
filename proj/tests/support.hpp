#pragma once

#include <string>

#include "mgsim/scenario_io.hpp"

inline mgsim::ScenarioSpec bundled(const std::string& name) {
    return mgsim::load_scenario(std::string(MGSIM_SCENARIO_DIR) + "/" + name + ".json");
}
