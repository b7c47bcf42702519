#include "mgsim/storage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mgsim/error.hpp"

namespace mgsim {

void BessUnit::validate() const {
    if (!(capacity > 0.0)) throw ValidationError("bess " + id + ": capacity must be positive");
    if (!(v_dc > 0.0)) throw ValidationError("bess " + id + ": v_dc must be positive");
    if (!(p_cha < 0.0 && p_dis > 0.0)) throw ValidationError("bess " + id + ": need p_cha < 0 < p_dis");
    if (!(soc_lo >= 0.0 && soc_lo < soc_hi && soc_hi <= 1.0))
        throw ValidationError("bess " + id + ": need 0 <= soc_lo < soc_hi <= 1");
}

double fleet_k_soc(const Fleet& fleet) {
    if (fleet.empty()) throw ValidationError("empty BESS fleet");
    for (const auto& u : fleet) u.validate();
    const double k = fleet.front().k_soc();
    for (const auto& u : fleet)
        if (std::abs(u.k_soc() - k) > 1e-9 * std::abs(k))
            throw ValidationError("bess " + u.id + ": k_soc differs from the rest of the fleet");
    return k;
}

double total_discharge(const Fleet& fleet) {
    double s = 0.0;
    for (const auto& u : fleet) s += u.p_dis;
    return s;
}

double total_charge(const Fleet& fleet) {
    double s = 0.0;
    for (const auto& u : fleet) s += u.p_cha;
    return s;
}

BessState make_state(const BessUnit& unit, double soc, double lambda) {
    lambda = std::clamp(lambda, -1.0, 1.0);
    return {soc, lambda, unit.k_soc() * lambda, lambda * unit.p_dis};
}

double soc_derivative(const BessUnit& unit, double p_ref) { return -p_ref / (unit.capacity * unit.v_dc); }

double leader_reference(double p_mis, const Fleet& fleet) {
    if (fleet.empty()) throw ValidationError("empty BESS fleet");
    return p_mis / total_discharge(fleet);
}

LeaderState step_leader(const LeaderState& leader, double p_mis_rate, const Fleet& fleet, double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    const double k = fleet_k_soc(fleet);
    LeaderState next = leader;
    next.lambda_r += p_mis_rate * dt / total_discharge(fleet);
    next.q_r = k * next.lambda_r;
    next.soc_r += next.q_r * dt;
    return next;
}

BessState integrate_lambda(const BessState& state, const BessUnit& unit, double u, double dt) {
    const double k = unit.k_soc();
    BessState next = state;
    next.lambda = std::clamp((state.q + u * dt) / k, -1.0, 1.0);
    next.q = k * next.lambda;
    next.p_ref = next.lambda * unit.p_dis;
    return next;
}

bool deadband_activates(double omega_syn, bool ctrl_active, double band_hz) {
    return ctrl_active || std::abs(omega_syn) > 2.0 * std::numbers::pi * band_hz;
}

ConstraintOutcome apply_local_constraints(const BessState& state, const BessState& previous,
                                          const BessUnit& unit, double omega_syn, bool ctrl_active,
                                          double band_hz) {
    ConstraintOutcome out{state, deadband_activates(omega_syn, ctrl_active, band_hz)};
    if (!out.active) {
        out.state.lambda = previous.lambda;
        out.state.q = previous.q;
        out.state.p_ref = previous.p_ref;
    }
    if (out.state.soc >= unit.soc_hi || out.state.soc <= unit.soc_lo) {
        out.state.q = 0.0;
        out.state.lambda = 0.0;
        out.state.p_ref = 0.0;
    }
    return out;
}

}  // namespace mgsim
