#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mgsim/engine.hpp"

namespace mgsim {

// %.9g, locale independent.
std::string fmt9(double x);

void write_timeseries_csv(const ScenarioSpec& spec, const RunResult& r, const std::filesystem::path& path);
void write_events_csv(const RunResult& r, const std::filesystem::path& path);

nlohmann::ordered_json metrics_json(const RunResult& r);
nlohmann::ordered_json feasibility_json(const FeasibilityReport& f, const GainSet& g);

void write_plot_script(const ScenarioSpec& spec, const std::filesystem::path& path);

// timeseries.csv, events.csv, metrics.json, feasibility.json, plot.gp
void write_run_artifacts(const ScenarioSpec& spec, const RunResult& r, const std::filesystem::path& dir);

}  // namespace mgsim
