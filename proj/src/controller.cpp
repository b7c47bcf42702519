#include "mgsim/controller.hpp"

#include <cmath>

#include "mgsim/error.hpp"

namespace mgsim {

std::string to_string(ControllerVariant v) {
    switch (v) {
        case ControllerVariant::Proposed: return "proposed";
        case ControllerVariant::FiniteBaseline: return "finite_baseline";
        case ControllerVariant::AsymptoticBaseline: return "asymptotic_baseline";
    }
    return "?";
}

ControllerVariant parse_variant(const std::string& s) {
    if (s == "proposed") return ControllerVariant::Proposed;
    if (s == "finite_baseline" || s == "finite") return ControllerVariant::FiniteBaseline;
    if (s == "asymptotic_baseline" || s == "asymptotic") return ControllerVariant::AsymptoticBaseline;
    throw ValidationError("unknown controller variant '" + s + "'");
}

double sig_pow(double x, double gamma) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), gamma), x);
}

ConsensusError consensus_errors(std::size_t i, const CommTopology& topology, const std::vector<double>& soc,
                                const std::vector<double>& q, double soc_r, double q_r, double alpha,
                                double beta) {
    const auto n = topology.size();
    if (i >= n) throw ValidationError("agent index out of range");
    if (soc.size() != n || q.size() != n) throw ValidationError("missing neighbour sample");
    ConsensusError c;
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = topology.adjacency(row, static_cast<Eigen::Index>(j));
        if (a == 0.0) continue;
        c.xi += a * (soc[i] - soc[j]);
        c.zeta += a * (q[i] - q[j]);
    }
    const double g = topology.pinning(row);
    if (g > 0.0) {
        c.xi += g * (soc[i] - soc_r);
        c.zeta += g * (q[i] - q_r);
    }
    c.phi = alpha * c.xi + beta * c.zeta;
    return c;
}

double control_input_proposed(double phi, const GainSet& g) {
    return -g.k1 * sig_pow(phi, g.gamma1) - g.k2 * sig_pow(phi, g.gamma2) - g.k3 * phi;
}

double control_input_finite_baseline(double phi, const GainSet& g) { return -g.k1 * sig_pow(phi, g.gamma1); }

double control_input_asymptotic_baseline(double phi, double k3) { return -k3 * phi; }

double control_input(ControllerVariant v, double phi, const GainSet& g) {
    switch (v) {
        case ControllerVariant::Proposed: return control_input_proposed(phi, g);
        case ControllerVariant::FiniteBaseline: return control_input_finite_baseline(phi, g);
        case ControllerVariant::AsymptoticBaseline: return control_input_asymptotic_baseline(phi, g.k3);
    }
    return 0.0;
}

double measurement_error(double held_u, double current_phi, ControllerVariant v, const GainSet& g) {
    return held_u - control_input(v, current_phi, g);
}

TriggerResult trigger_check(double e, double phi, double rho) {
    if (!(rho > 0.0)) throw ValidationError("rho must be positive");
    const double f = std::abs(e) - rho * std::abs(phi);
    return {f >= 0.0, f};
}

namespace {
void check_segments(const std::vector<Segment>& segments, double t) {
    if (segments.empty()) throw ValidationError("reconstruction needs at least one segment");
    for (std::size_t h = 1; h < segments.size(); ++h)
        if (segments[h].t_start < segments[h - 1].t_start)
            throw ValidationError("reconstruction segments are not ordered");
    if (t < segments.front().t_start) throw ValidationError("reconstruction time precedes the base instant");
}
}  // namespace

double reconstruct_zeta(double base_zeta, const std::vector<Segment>& segments, double t) {
    check_segments(segments, t);
    double z = base_zeta;
    for (std::size_t h = 0; h < segments.size(); ++h) {
        const double end = h + 1 < segments.size() ? std::min(segments[h + 1].t_start, t) : t;
        if (end <= segments[h].t_start) break;
        z += segments[h].rate * (end - segments[h].t_start);
    }
    return z;
}

double reconstruct_xi(double base_xi, double base_zeta, const std::vector<Segment>& segments, double t) {
    check_segments(segments, t);
    double xi = base_xi, z = base_zeta;
    for (std::size_t h = 0; h < segments.size(); ++h) {
        const double end = h + 1 < segments.size() ? std::min(segments[h + 1].t_start, t) : t;
        const double dt = end - segments[h].t_start;
        if (dt <= 0.0) break;
        xi += z * dt + 0.5 * segments[h].rate * dt * dt;
        z += segments[h].rate * dt;
    }
    return xi;
}

void ReconstructionTracker::rebase(double t, double xi, double zeta, double rate) {
    t0_ = t;
    xi0_ = xi;
    zeta0_ = zeta;
    rate_ = rate;
}

void ReconstructionTracker::set_rate(double t, double rate) {
    if (rate == rate_) return;
    const double dt = t - t0_;
    xi0_ += zeta0_ * dt + 0.5 * rate_ * dt * dt;
    zeta0_ += rate_ * dt;
    t0_ = t;
    rate_ = rate;
}

void ReconstructionTracker::shift_zeta(double t, double dzeta) {
    const double dt = t - t0_;
    xi0_ += zeta0_ * dt + 0.5 * rate_ * dt * dt;
    zeta0_ += rate_ * dt + dzeta;
    t0_ = t;
}

double ReconstructionTracker::xi(double t) const {
    const double dt = t - t0_;
    return xi0_ + zeta0_ * dt + 0.5 * rate_ * dt * dt;
}

double ReconstructionTracker::zeta(double t) const { return zeta0_ + rate_ * (t - t0_); }

Homogeneity homogeneity_triples(const GainSet& g) {
    if (!(g.gamma1 > 0.0 && g.gamma1 < 1.0)) throw ValidationError("gamma1 must be in (0,1)");
    if (!(g.gamma2 > 1.0)) throw ValidationError("gamma2 must be > 1");
    return {1.0 / (1.0 - g.gamma1), -1.0, 1.0 / (g.gamma2 - 1.0), 1.0};
}

}  // namespace mgsim
