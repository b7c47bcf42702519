#include "mgsim/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgsim/error.hpp"

namespace mgsim {

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Res: return "RES";
        case NodeKind::Bess: return "BESS";
        case NodeKind::Load: return "LOAD";
    }
    return "?";
}

NodeKind parse_node_kind(const std::string& s) {
    if (s == "RES") return NodeKind::Res;
    if (s == "BESS") return NodeKind::Bess;
    if (s == "LOAD") return NodeKind::Load;
    throw ValidationError("unknown node kind '" + s + "'");
}

PlantModel::PlantModel(std::vector<PhysNode> nodes, std::vector<Line> lines)
    : nodes_(std::move(nodes)), lines_(std::move(lines)) {
    if (nodes_.empty()) throw ValidationError("plant has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (!(n.v_mag > 0.0)) throw ValidationError("node " + n.id + ": v_mag must be positive");
        switch (n.kind) {
            case NodeKind::Res:
                if (!(n.p_nom >= 0.0 && n.p_nom <= n.p_rat))
                    throw ValidationError("node " + n.id + ": p_nom must be in [0, p_rat]");
                [[fallthrough]];
            case NodeKind::Bess:
                if (!(n.kp > 0.0)) throw ValidationError("node " + n.id + ": kp must be positive");
                droop_.push_back(i);
                (n.kind == NodeKind::Res ? res_ : bess_).push_back(i);
                break;
            case NodeKind::Load:
                if (!(n.p_load >= 0.0)) throw ValidationError("node " + n.id + ": p_load must be non-negative");
                load_.push_back(i);
                break;
        }
    }
    if (droop_.empty()) throw ValidationError("plant needs at least one droop node");
    for (const auto& l : lines_) {
        if (l.from >= nodes_.size() || l.to >= nodes_.size() || l.from == l.to)
            throw ValidationError("line endpoints must be distinct existing nodes");
        if (!(l.reactance > 0.0)) throw ValidationError("line reactance must be positive");
    }
}

double PlantModel::total_load() const {
    double s = 0.0;
    for (auto i : load_) s += nodes_[i].p_load;
    return s;
}

double PlantModel::total_res_nominal() const {
    double s = 0.0;
    for (auto i : res_) s += nodes_[i].p_nom;
    return s;
}

double line_power(double v_i, double v_j, double phi_i, double phi_j, double z) {
    if (!(z > 0.0)) throw ValidationError("line impedance must be positive");
    return v_i * v_j * std::sin(phi_i - phi_j) / z;
}

double droop_frequency(const PhysNode& node, double p_inj, double p_ref) {
    if (!node.droop()) throw ValidationError("droop_frequency called on load node " + node.id);
    return -node.kp * (p_inj - p_ref);
}

Eigen::VectorXd injections(const PlantModel& model, const Eigen::VectorXd& phase) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));
    const auto& nodes = model.nodes();
    for (const auto& l : model.lines()) {
        const auto a = static_cast<Eigen::Index>(l.from), b = static_cast<Eigen::Index>(l.to);
        const double f = line_power(nodes[l.from].v_mag, nodes[l.to].v_mag, phase(a), phase(b), l.reactance);
        p(a) += f;
        p(b) -= f;
    }
    return p;
}

namespace {

double power_scale(const PlantModel& model) { return std::max(1.0, model.total_load()); }

// Newton on the nodes listed in `free` so that injections hit `target` there.
LoadSolveResult solve_phases(const PlantModel& model, Eigen::VectorXd phase,
                             const std::vector<std::size_t>& free, const Eigen::VectorXd& target,
                             double tol_abs, int max_iter) {
    const auto m = static_cast<Eigen::Index>(free.size());
    LoadSolveResult out;
    if (m == 0) {
        out.phase = std::move(phase);
        return out;
    }
    std::vector<Eigen::Index> slot(model.size(), -1);
    for (Eigen::Index k = 0; k < m; ++k) slot[free[static_cast<std::size_t>(k)]] = k;

    const auto& nodes = model.nodes();
    Eigen::VectorXd r(m);
    Eigen::MatrixXd jac(m, m);
    for (int it = 0;; ++it) {
        const Eigen::VectorXd p = injections(model, phase);
        for (Eigen::Index k = 0; k < m; ++k) {
            const auto i = static_cast<Eigen::Index>(free[static_cast<std::size_t>(k)]);
            r(k) = target(i) - p(i);
        }
        out.residual = r.cwiseAbs().maxCoeff();
        out.iterations = it;
        if (out.residual <= tol_abs) break;
        if (it >= max_iter)
            throw ConvergenceError("load-flow Newton did not converge (residual " +
                                       std::to_string(out.residual) + " W)",
                                   out.residual);
        jac.setZero();
        for (const auto& l : model.lines()) {
            const double c = nodes[l.from].v_mag * nodes[l.to].v_mag *
                             std::cos(phase(static_cast<Eigen::Index>(l.from)) -
                                      phase(static_cast<Eigen::Index>(l.to))) /
                             l.reactance;
            const auto a = slot[l.from], b = slot[l.to];
            // r = target - p; dp_a/dphi_a = c, dp_a/dphi_b = -c
            if (a >= 0) jac(a, a) -= c;
            if (b >= 0) jac(b, b) -= c;
            if (a >= 0 && b >= 0) {
                jac(a, b) += c;
                jac(b, a) += c;
            }
        }
        const Eigen::VectorXd step = jac.partialPivLu().solve(-r);
        if (!step.allFinite())
            throw ConvergenceError("load-flow Jacobian is singular", out.residual);
        for (Eigen::Index k = 0; k < m; ++k)
            phase(static_cast<Eigen::Index>(free[static_cast<std::size_t>(k)])) += step(k);
    }
    out.phase = std::move(phase);
    return out;
}

Eigen::VectorXd load_targets(const PlantModel& model) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));
    for (auto i : model.load_nodes()) t(static_cast<Eigen::Index>(i)) = -model.node(i).p_load;
    return t;
}

PlantState finish_state(const PlantModel& model, Eigen::VectorXd phase, double residual, double t,
                        const Eigen::VectorXd& refs) {
    PlantState s;
    s.p_inj = injections(model, phase);
    s.phase = std::move(phase);
    s.omega_dev = Eigen::VectorXd::Zero(s.phase.size());
    for (auto i : model.droop_nodes()) {
        const auto k = static_cast<Eigen::Index>(i);
        s.omega_dev(k) = droop_frequency(model.node(i), s.p_inj(k), refs(k));
    }
    s.residual = residual;
    s.t = t;
    return s;
}

}  // namespace

LoadSolveResult solve_load_phases(const PlantModel& model, const Eigen::VectorXd& phase, double tol,
                                  int max_iter) {
    return solve_phases(model, phase, model.load_nodes(), load_targets(model), tol * power_scale(model),
                        max_iter);
}

Eigen::VectorXd droop_references(const PlantModel& model, const std::vector<double>& bess_refs) {
    if (bess_refs.size() != model.bess_nodes().size())
        throw ValidationError("one BESS reference per BESS node required");
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));
    for (auto i : model.res_nodes()) r(static_cast<Eigen::Index>(i)) = model.node(i).p_nom;
    for (std::size_t k = 0; k < bess_refs.size(); ++k)
        r(static_cast<Eigen::Index>(model.bess_nodes()[k])) = bess_refs[k];
    return r;
}

PlantState initialize_state(const PlantModel& model, const std::vector<double>& bess_refs) {
    const Eigen::VectorXd refs = droop_references(model, bess_refs);
    const double w = sync_frequency(model, bess_refs);
    Eigen::VectorXd target = load_targets(model);
    for (auto i : model.droop_nodes())
        target(static_cast<Eigen::Index>(i)) = refs(static_cast<Eigen::Index>(i)) + w / model.node(i).kp;
    std::vector<std::size_t> free;
    for (std::size_t i = 1; i < model.size(); ++i) free.push_back(i);
    auto sol = solve_phases(model, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size())), free,
                            target, 1e-9 * power_scale(model), 100);
    // Leave the load buses exactly balanced for the given droop phases.
    sol = solve_load_phases(model, sol.phase);
    return finish_state(model, std::move(sol.phase), sol.residual, 0.0, refs);
}

PlantState step_plant(const PlantModel& model, const PlantState& state, const std::vector<double>& bess_refs,
                      double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    const Eigen::VectorXd refs = droop_references(model, bess_refs);
    const auto& droop = model.droop_nodes();

    // Phase rates at a given network state; loads re-solved in place.
    auto rates = [&](Eigen::VectorXd& phase) {
        phase = solve_load_phases(model, phase).phase;
        const Eigen::VectorXd p = injections(model, phase);
        Eigen::VectorXd w = Eigen::VectorXd::Zero(phase.size());
        for (auto i : droop) {
            const auto k = static_cast<Eigen::Index>(i);
            w(k) = -model.node(i).kp * (p(k) - refs(k));
        }
        return w;
    };

    Eigen::VectorXd y = state.phase;
    const Eigen::VectorXd k1 = rates(y);
    Eigen::VectorXd y2 = y + 0.5 * dt * k1;
    const Eigen::VectorXd k2 = rates(y2);
    Eigen::VectorXd y3 = y + 0.5 * dt * k2;
    const Eigen::VectorXd k3 = rates(y3);
    Eigen::VectorXd y4 = y + dt * k3;
    const Eigen::VectorXd k4 = rates(y4);

    Eigen::VectorXd next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    auto sol = solve_load_phases(model, next);
    return finish_state(model, std::move(sol.phase), sol.residual, state.t + dt, refs);
}

double sync_frequency(const PlantModel& model, const std::vector<double>& bess_refs) {
    if (bess_refs.size() != model.bess_nodes().size())
        throw ValidationError("one BESS reference per BESS node required");
    double num = model.total_res_nominal() - model.total_load();
    for (double r : bess_refs) num += r;
    double den = 0.0;
    for (auto i : model.droop_nodes()) den += 1.0 / model.node(i).kp;
    return num / den;
}

double total_mismatch(const PlantModel& model) { return model.total_load() - model.total_res_nominal(); }

bool check_capacity(const PlantModel& model, const std::vector<double>& load_totals, double p_dis_total,
                    double p_cha_total) {
    if (load_totals.empty()) return true;
    const auto [lo, hi] = std::minmax_element(load_totals.begin(), load_totals.end());
    const double gen = model.total_res_nominal();
    return *hi - gen <= p_dis_total && *lo - gen >= p_cha_total;
}

double power_balance_residual(const PlantModel& model, const PlantState& state) {
    const Eigen::VectorXd flows = injections(model, state.phase);
    double s = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double inj = model.node(i).droop() ? state.p_inj(k) : -model.node(i).p_load;
        s += inj - flows(k);
    }
    return std::abs(s) / power_scale(model);
}

}  // namespace mgsim
