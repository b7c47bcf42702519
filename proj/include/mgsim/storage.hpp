#pragma once

#include <string>
#include <vector>

namespace mgsim {

struct BessUnit {
    std::string id;
    double capacity = 0.0;  // C
    double v_dc = 800.0;    // V
    double p_dis = 0.0;     // W, > 0
    double p_cha = 0.0;     // W, < 0
    double soc_hi = 0.8;
    double soc_lo = 0.2;

    double k_soc() const { return -p_dis / (capacity * v_dc); }
    void validate() const;

    bool operator==(const BessUnit&) const = default;
};

using Fleet = std::vector<BessUnit>;

// Validates every unit and the shared SoC gain; returns that gain.
double fleet_k_soc(const Fleet& fleet);
double total_discharge(const Fleet& fleet);
double total_charge(const Fleet& fleet);

struct BessState {
    double soc = 0.5;
    double lambda = 0.0;
    double q = 0.0;      // k_soc * lambda
    double p_ref = 0.0;  // lambda * p_dis
};

BessState make_state(const BessUnit& unit, double soc, double lambda);

struct LeaderState {
    double soc_r = 0.5;
    double lambda_r = 0.0;
    double q_r = 0.0;
};

double soc_derivative(const BessUnit& unit, double p_ref);

double leader_reference(double p_mis, const Fleet& fleet);

// lambda_r moves by p_mis_rate*dt/sum(p_dis) at the start of the step, then
// soc_r advances with the new (held) q_r.
LeaderState step_leader(const LeaderState& leader, double p_mis_rate, const Fleet& fleet, double dt);

// Limited integrator: q += u dt, lambda clamped to [-1, 1], q and p_ref resynced.
BessState integrate_lambda(const BessState& state, const BessUnit& unit, double u, double dt);

struct ConstraintOutcome {
    BessState state;
    bool active = false;
};

inline constexpr double kDeadbandHz = 0.1;

bool deadband_activates(double omega_syn, bool ctrl_active, double band_hz = kDeadbandHz);

// Frequency deadband (hold previous p_ref while inactive inside the band)
// followed by the SoC bounds (q forced to 0 at or past a bound).
ConstraintOutcome apply_local_constraints(const BessState& state, const BessState& previous,
                                          const BessUnit& unit, double omega_syn, bool ctrl_active,
                                          double band_hz = kDeadbandHz);

}  // namespace mgsim
