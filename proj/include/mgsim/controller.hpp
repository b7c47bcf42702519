#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mgsim/gains.hpp"
#include "mgsim/netgraph.hpp"

namespace mgsim {

enum class ControllerVariant { Proposed, FiniteBaseline, AsymptoticBaseline };

std::string to_string(ControllerVariant v);
// Accepts "proposed", "finite_baseline"/"finite", "asymptotic_baseline"/"asymptotic".
ControllerVariant parse_variant(const std::string& s);

double sig_pow(double x, double gamma);

struct ConsensusError {
    double xi = 0.0;
    double zeta = 0.0;
    double phi = 0.0;
};

// Follower-minus-leader sign on both the neighbour and the pinning terms.
ConsensusError consensus_errors(std::size_t i, const CommTopology& topology, const std::vector<double>& soc,
                                const std::vector<double>& q, double soc_r, double q_r, double alpha,
                                double beta);

double control_input_proposed(double phi, const GainSet& g);
double control_input_finite_baseline(double phi, const GainSet& g);
double control_input_asymptotic_baseline(double phi, double k3);
double control_input(ControllerVariant v, double phi, const GainSet& g);

// u(held) - u(current) through the same law.
double measurement_error(double held_u, double current_phi, ControllerVariant v, const GainSet& g);

struct TriggerResult {
    bool fired = false;
    double f_value = 0.0;
};

TriggerResult trigger_check(double e, double phi, double rho);

// Piecewise-constant zeta rate starting at t_start.
struct Segment {
    double t_start = 0.0;
    double rate = 0.0;
};

// zeta(t) from the value at the first segment start.
double reconstruct_zeta(double base_zeta, const std::vector<Segment>& segments, double t);
// Exact double integral: xi(t) = xi(t_k) + integral of zeta over [t_k, t].
double reconstruct_xi(double base_xi, double base_zeta, const std::vector<Segment>& segments, double t);

// Running form of reconstruct_zeta/xi: closed segments are folded into the
// base as soon as the next one opens, so evaluation is O(1).
class ReconstructionTracker {
public:
    void rebase(double t, double xi, double zeta, double rate);
    void set_rate(double t, double rate);
    // Jump in zeta at time t (leader reference step), xi is continuous.
    void shift_zeta(double t, double dzeta);

    double xi(double t) const;
    double zeta(double t) const;
    double rate() const { return rate_; }

private:
    double t0_ = 0.0, xi0_ = 0.0, zeta0_ = 0.0, rate_ = 0.0;
};

struct Homogeneity {
    double r_z = 0.0;
    double d_z = -1.0;
    double r_i = 0.0;
    double d_i = 1.0;
};

Homogeneity homogeneity_triples(const GainSet& g);

struct EventRecord {
    std::size_t agent = 0;
    double t = 0.0;
    std::optional<double> interval;  // empty for an agent's first sample
    double f_value = 0.0;
};

// What an agent holds between its own events.
struct HeldSample {
    double t_event = 0.0;
    double u = 0.0;
    double phi = 0.0;
    bool valid = false;
};

}  // namespace mgsim
