#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mgsim/gains.hpp"

namespace mgsim {

// Undirected communication graph between the battery agents plus the
// pinning gains that couple agents to the virtual leader.
struct CommTopology {
    Eigen::MatrixXd adjacency;
    Eigen::VectorXd pinning;

    std::size_t size() const { return static_cast<std::size_t>(adjacency.rows()); }

    // Build from an undirected edge list.
    static CommTopology from_edges(std::size_t n,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                   const std::vector<double>& pinning);
    static CommTopology ring(std::size_t n, std::size_t pinned = 0, double gain = 1.0);

    std::vector<std::pair<std::size_t, std::size_t>> edges() const;
    std::vector<std::size_t> neighbors(std::size_t i) const;

    // Full structural check: symmetric 0/1, zero diagonal, connected, pinned.
    void validate() const;
};

bool is_connected(const Eigen::MatrixXd& adjacency);

Eigen::MatrixXd laplacian(const CommTopology& topology);
Eigen::MatrixXd grounded_matrix(const Eigen::MatrixXd& lap, const CommTopology& topology);

struct Spectrum {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // column k pairs with values[k]
};

// Cyclic Jacobi rotations. Rejects non-symmetric input.
Spectrum spectrum(const Eigen::MatrixXd& sym, double tol = 1e-12);

struct FeasibilityReport {
    double lambda_min_q = 0.0;
    double lambda_max_qinv = 0.0;
    double cond1_value = 0.0;
    double cond2_value = 0.0;
    double rho_upper = 0.0;
    bool feasible = false;
};

FeasibilityReport check_feasibility(const GainSet& gains, const Eigen::MatrixXd& q);

}  // namespace mgsim
