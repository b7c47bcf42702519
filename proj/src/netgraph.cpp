#include "mgsim/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mgsim/error.hpp"

namespace mgsim {

CommTopology CommTopology::from_edges(std::size_t n,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                      const std::vector<double>& pinning) {
    if (pinning.size() != n) throw ValidationError("pinning must have one entry per agent");
    CommTopology t;
    t.adjacency = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (auto [a, b] : edges) {
        if (a >= n || b >= n) throw ValidationError("edge endpoint out of range");
        if (a == b) throw ValidationError("self-loop in communication graph");
        t.adjacency(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
        t.adjacency(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = 1.0;
    }
    t.pinning = Eigen::Map<const Eigen::VectorXd>(pinning.data(), static_cast<Eigen::Index>(n));
    return t;
}

CommTopology CommTopology::ring(std::size_t n, std::size_t pinned, double gain) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    if (n == 2) e.resize(1);
    std::vector<double> g(n, 0.0);
    g.at(pinned) = gain;
    return from_edges(n, e, g);
}

std::vector<std::pair<std::size_t, std::size_t>> CommTopology::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
        for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j)
            if (adjacency(i, j) != 0.0)
                out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return out;
}

std::vector<std::size_t> CommTopology::neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j)
        if (adjacency(row, j) != 0.0) out.push_back(static_cast<std::size_t>(j));
    return out;
}

namespace {

void check_structure(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw ValidationError("adjacency must be square and non-empty");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (a(i, i) != 0.0) throw ValidationError("adjacency has a self-loop at agent " + std::to_string(i));
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (a(i, j) != 0.0 && a(i, j) != 1.0) throw ValidationError("adjacency entries must be 0 or 1");
            if (a(i, j) != a(j, i)) throw ValidationError("adjacency is not symmetric");
        }
    }
}

}  // namespace

bool is_connected(const Eigen::MatrixXd& adjacency) {
    const auto n = adjacency.rows();
    if (n == 0) return false;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        for (Eigen::Index j = 0; j < n; ++j)
            if (adjacency(i, j) != 0.0 && !seen[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = 1;
                stack.push_back(j);
            }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

void CommTopology::validate() const {
    check_structure(adjacency);
    if (pinning.size() != adjacency.rows()) throw ValidationError("pinning must have one entry per agent");
    if ((pinning.array() < 0.0).any()) throw ValidationError("pinning gains must be non-negative");
    if (!(pinning.array() > 0.0).any()) throw ValidationError("at least one pinning gain must be positive");
    if (!is_connected(adjacency)) throw ValidationError("communication graph is disconnected");
}

Eigen::MatrixXd laplacian(const CommTopology& topology) {
    check_structure(topology.adjacency);
    Eigen::MatrixXd lap = -topology.adjacency;
    lap.diagonal() = topology.adjacency.rowwise().sum();
    return lap;
}

Eigen::MatrixXd grounded_matrix(const Eigen::MatrixXd& lap, const CommTopology& topology) {
    if (topology.pinning.size() != lap.rows()) throw ValidationError("pinning size does not match Laplacian");
    Eigen::MatrixXd q = lap;
    q.diagonal() += topology.pinning;
    const auto s = spectrum(q);
    if (!(s.values(0) > 1e-12)) throw ValidationError("grounded matrix is not positive definite");
    return q;
}

Spectrum spectrum(const Eigen::MatrixXd& sym, double tol) {
    const auto n = sym.rows();
    if (n != sym.cols()) throw ValidationError("spectrum needs a square matrix");
    const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
    if (n == 0) throw ValidationError("spectrum needs a non-empty matrix");
    if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
        throw ValidationError("spectrum needs a symmetric matrix");

    Eigen::MatrixXd a = sym;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    auto off = [&] {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off() > tol * scale; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
    Spectrum out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

FeasibilityReport check_feasibility(const GainSet& gains, const Eigen::MatrixXd& q) {
    gains.validate();
    const auto s = spectrum(q);
    if (!(s.values(0) > 1e-12)) throw ValidationError("grounded matrix is not positive definite");

    FeasibilityReport r;
    r.lambda_min_q = s.values(0);
    r.lambda_max_qinv = 1.0 / r.lambda_min_q;
    const double a = gains.alpha, b = gains.beta;
    r.cond1_value = 2.0 * b * b - a * r.lambda_max_qinv;
    r.cond2_value = gains.k3 - 1.0 - gains.d / 2.0 + a * a - b * b + r.lambda_max_qinv;
    r.rho_upper = 2.0 * gains.d * r.cond2_value;
    r.feasible = r.cond1_value > 0.0 && r.cond2_value > 0.0 && gains.rho > 0.0 && gains.rho < r.rho_upper;
    return r;
}

}  // namespace mgsim
