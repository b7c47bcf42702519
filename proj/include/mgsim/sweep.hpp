#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mgsim/engine.hpp"

namespace mgsim {

// Named (k1, k2, k3, alpha, beta) sets: S1, S2, S3 and case3. Other gain
// fields are kept from `base`.
GainSet gain_preset(const std::string& name, const GainSet& base);

struct SweepCell {
    std::string scenario;
    std::string gains;  // preset name, or "scenario" for the file's own gains
    ControllerVariant variant = ControllerVariant::Proposed;
    double scale = 1.0;
    ScenarioSpec spec;
};

struct SweepRow {
    std::string scenario;
    std::string gains;
    ControllerVariant variant = ControllerVariant::Proposed;
    double scale = 1.0;
    std::optional<RunMetrics> metrics;
    std::string error;
};

// Cross product; empty gain/variant/scale lists fall back to the scenario's own.
std::vector<SweepCell> build_cells(const std::vector<std::pair<std::string, ScenarioSpec>>& scenarios,
                                   const std::vector<std::string>& gains,
                                   const std::vector<ControllerVariant>& variants, const std::vector<double>& scales);

// Reference runner, one cell after another.
std::vector<SweepRow> run_sweep_serial(const std::vector<SweepCell>& cells);
// Same rows, cells distributed over OpenMP threads.
std::vector<SweepRow> run_sweep_parallel(const std::vector<SweepCell>& cells);

void write_comparison_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace mgsim
