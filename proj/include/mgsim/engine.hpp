#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mgsim/controller.hpp"
#include "mgsim/netgraph.hpp"
#include "mgsim/plant.hpp"
#include "mgsim/storage.hpp"

namespace mgsim {

// Piecewise-constant (time, value) steps, sorted, first step at t = 0.
struct StepSchedule {
    std::vector<std::pair<double, double>> steps;

    double value_at(double t) const;
    std::vector<double> values() const;
    bool operator==(const StepSchedule&) const = default;
};

enum class Monitoring { Continuous, Reconstructed };

std::string to_string(Monitoring m);
Monitoring parse_monitoring(const std::string& s);

struct ScenarioSpec {
    std::string name;
    std::string description;

    PlantModel plant;
    Fleet fleet;  // same order as plant.bess_nodes()
    CommTopology comm;
    GainSet gains;
    ControllerVariant variant = ControllerVariant::Proposed;
    Monitoring monitoring = Monitoring::Continuous;

    StepSchedule load;       // total W, split evenly over load nodes
    StepSchedule res_scale;  // multiplies every RES p_nom

    std::vector<double> soc0;
    std::vector<double> lambda0;

    bool constraints_enabled = false;
    double deadband_hz = kDeadbandHz;
    double release_hold = 0.5;  // s of consensus before the deadband latch drops

    double horizon = 10.0;
    double dt = 1e-3;
    double activation_time = 0.0;
    int measurement_steps = 10;  // leader samples P_L every measurement_steps*dt
    int plant_substeps = 1;
    double record_interval = 0.0;  // 0 records every step
    double ic_scale = 1.0;

    double settle_tol = 1e-3;
    double settle_hold = 0.5;

    // Structural and range checks across all modules.
    void validate() const;
    // Grounded matrix of the comm graph.
    Eigen::MatrixXd grounded() const;
};

// Recorded signals, one entry per recorded instant; per-agent signals are
// indexed [agent][sample].
struct Trace {
    std::vector<double> t;
    std::vector<std::vector<double>> lambda, soc, omega, p_inj, p_ref;
    std::vector<std::vector<double>> res_omega, res_p_inj;
    std::vector<double> lambda_r, soc_r, p_load, omega_syn;
    std::vector<int> active;
};

struct EventStats {
    std::size_t count = 0;
    std::optional<double> mean_interval;
    std::optional<double> min_interval;
    std::vector<std::size_t> per_agent_count;
    std::vector<std::optional<double>> per_agent_mean;
};

struct RunMetrics {
    std::optional<double> settling_time;  // measured from window_start
    double window_start = 0.0;
    double window_end = 0.0;
    double overshoot = 0.0;
    EventStats events;
    double final_consensus_error = 0.0;
    double final_soc_spread = 0.0;
    double final_frequency_error = 0.0;
    double max_power_residual = 0.0;
    std::size_t soc_clamps = 0;
};

struct RunResult {
    Trace trace;
    std::vector<EventRecord> events;
    std::vector<double> activations;
    std::vector<double> releases;
    RunMetrics metrics;
    FeasibilityReport feasibility;
    std::vector<std::string> warnings;
};

RunResult run_scenario(const ScenarioSpec& spec);

// First time after which max_i |x_i - ref| stays within tol until the end
// of the series, provided at least `hold` seconds remain. tol <= 0 selects
// 1e-3*max(1, |ref|) per sample.
std::optional<double> settling_time(const std::vector<double>& t, const std::vector<std::vector<double>>& series,
                                    const std::vector<double>& reference, double tol = 0.0, double hold = 0.5);

EventStats event_statistics(const std::vector<EventRecord>& records, std::size_t n_agents = 0);

// Signed excursion of q past its final value, relative to the commanded
// change, maximised over agents. Indices select the window inside the trace.
double overshoot(const std::vector<std::vector<double>>& q, const std::vector<double>& q_final,
                 std::size_t begin, std::size_t end);

struct ScalingCell {
    ControllerVariant variant;
    double scale = 1.0;
    std::optional<double> settling_time;
};

std::vector<ScalingCell> compare_initial_scaling(const ScenarioSpec& spec,
                                                 const std::vector<ControllerVariant>& variants,
                                                 const std::vector<double>& scales);

}  // namespace mgsim
