#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mgsim {

enum class NodeKind { Res, Bess, Load };

const char* to_string(NodeKind k);
NodeKind parse_node_kind(const std::string& s);

struct PhysNode {
    std::string id;
    NodeKind kind = NodeKind::Load;
    double v_mag = 311.0;  // V
    double kp = 0.0;       // rad/s per W, droop nodes only
    double p_nom = 0.0;    // W, RES set point
    double p_rat = 0.0;    // W, RES rating
    double p_load = 0.0;   // W, magnitude; injection is -p_load

    bool droop() const { return kind != NodeKind::Load; }
    bool operator==(const PhysNode&) const = default;
};

struct Line {
    std::size_t from = 0;
    std::size_t to = 0;
    double reactance = 0.0;  // ohm, lossless

    bool operator==(const Line&) const = default;
};

// Node/line tables with cached index lists. Nodes may be edited in place
// (loads, RES set points) but not added or removed after finalize().
class PlantModel {
public:
    PlantModel() = default;
    PlantModel(std::vector<PhysNode> nodes, std::vector<Line> lines);

    const std::vector<PhysNode>& nodes() const { return nodes_; }
    const std::vector<Line>& lines() const { return lines_; }
    PhysNode& node(std::size_t i) { return nodes_.at(i); }
    const PhysNode& node(std::size_t i) const { return nodes_.at(i); }
    std::size_t size() const { return nodes_.size(); }

    const std::vector<std::size_t>& res_nodes() const { return res_; }
    const std::vector<std::size_t>& bess_nodes() const { return bess_; }
    const std::vector<std::size_t>& load_nodes() const { return load_; }
    const std::vector<std::size_t>& droop_nodes() const { return droop_; }

    double total_load() const;
    double total_res_nominal() const;

    bool operator==(const PlantModel& o) const { return nodes_ == o.nodes_ && lines_ == o.lines_; }

private:
    std::vector<PhysNode> nodes_;
    std::vector<Line> lines_;
    std::vector<std::size_t> res_, bess_, load_, droop_;
};

struct PlantState {
    Eigen::VectorXd phase;      // rad, every node
    Eigen::VectorXd omega_dev;  // rad/s, zero on load nodes
    Eigen::VectorXd p_inj;      // W, every node (sum of outgoing line flows)
    double t = 0.0;
    double residual = 0.0;      // last load-balance residual, W
};

double line_power(double v_i, double v_j, double phi_i, double phi_j, double z);

double droop_frequency(const PhysNode& node, double p_inj, double p_ref);

// Outgoing line flow summed per node.
Eigen::VectorXd injections(const PlantModel& model, const Eigen::VectorXd& phase);

struct LoadSolveResult {
    Eigen::VectorXd phase;
    double residual = 0.0;
    int iterations = 0;
};

// Newton on load-bus balance with droop-node phases held fixed.
// tol is relative to max(1 W, total load).
LoadSolveResult solve_load_phases(const PlantModel& model, const Eigen::VectorXd& phase,
                                  double tol = 1e-8, int max_iter = 50);

// Per-node droop reference: p_nom on RES, the given value on BESS, 0 on loads.
// bess_refs follows model.bess_nodes() order.
Eigen::VectorXd droop_references(const PlantModel& model, const std::vector<double>& bess_refs);

// Synchronous equilibrium for the given references: all droop nodes at the
// synchronous frequency, node 0 as phase reference.
PlantState initialize_state(const PlantModel& model, const std::vector<double>& bess_refs);

// One RK4 step on droop phases; load phases re-solved after every stage.
PlantState step_plant(const PlantModel& model, const PlantState& state,
                      const std::vector<double>& bess_refs, double dt);

double sync_frequency(const PlantModel& model, const std::vector<double>& bess_refs);

double total_mismatch(const PlantModel& model);

bool check_capacity(const PlantModel& model, const std::vector<double>& load_totals,
                    double p_dis_total, double p_cha_total);

// |sum over nodes of (injection - outgoing flows)| relative to max(1 W, total load).
double power_balance_residual(const PlantModel& model, const PlantState& state);

}  // namespace mgsim
