#include "swarmsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace swarmsim {

TopologyMatrix TopologyMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    TopologyMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) {
            throw ConfigError("topology matrix row " + std::to_string(i + 1) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " +
                              std::to_string(rows.size()));
        }
        for (std::size_t j = 0; j < rows.size(); ++j) m.set_weight(i, j, rows[i][j]);
    }
    return m;
}

std::vector<AgentId> TopologyMatrix::in_neighbors(AgentId i) const {
    std::vector<AgentId> out;
    for (AgentId j = 0; j < n_; ++j) {
        if (communicates(i, j)) out.push_back(j);
    }
    return out;
}

bool TopologyMatrix::row_is_zero(AgentId i) const {
    for (AgentId j = 0; j < n_; ++j) {
        if (weight(i, j) != 0.0) return false;
    }
    return true;
}

double TopologyMatrix::max_weighted_in_degree() const {
    double best = 0.0;
    for (AgentId i = 0; i < n_; ++i) {
        double sum = 0.0;
        for (AgentId j = 0; j < n_; ++j) sum += std::max(0.0, weight(i, j));
        best = std::max(best, sum);
    }
    return best;
}

std::vector<std::vector<double>> TopologyMatrix::rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
    for (AgentId i = 0; i < n_; ++i)
        for (AgentId j = 0; j < n_; ++j) out[i][j] = weight(i, j);
    return out;
}

TopologyMatrix six_uav_example() {
    return TopologyMatrix::from_rows({
        {0, 0, 0, 0, 0, 0},
        {1, 0, 0, 0, 0, 0},
        {1, 1, 0, 0, 0, 0},
        {0, 1, 1, 0, 0, 0},
        {0, 0, 1, 1, 0, 0},
        {0, 0, 0, 1, 1, 0},
    });
}

TopologyMatrix chain_topology(std::size_t n, std::size_t fan_in) {
    TopologyMatrix m(n);
    for (AgentId i = 1; i < n; ++i) {
        const AgentId first = i > fan_in ? i - fan_in : 0;
        for (AgentId j = first; j < i; ++j) m.set_weight(i, j, 1.0);
    }
    return m;
}

namespace {

std::string edge_name(AgentId receiver, AgentId sender) {
    return "w[" + std::to_string(receiver + 1) + "][" + std::to_string(sender + 1) + "]";
}

}  // namespace

std::vector<TopologyViolation> validate(const TopologyMatrix& topology, AgentId leader) {
    using Kind = TopologyViolation::Kind;
    std::vector<TopologyViolation> out;
    const std::size_t n = topology.size();
    if (n == 0) return out;
    if (leader >= n) {
        out.push_back({Kind::BadLeader, leader, leader,
                       "leader uav" + std::to_string(leader + 1) + " is outside 1.." + std::to_string(n)});
        return out;
    }

    for (AgentId i = 0; i < n; ++i) {
        for (AgentId j = 0; j < n; ++j) {
            const double w = topology.weight(i, j);
            if (!std::isfinite(w) || w < 0.0) {
                out.push_back({Kind::InvalidWeight, i, j,
                               edge_name(i, j) + " = " + std::to_string(w) + " is not a finite non-negative weight"});
            } else if (i == j && w != 0.0) {
                out.push_back({Kind::SelfEdge, i, j, edge_name(i, j) + " is a self-edge"});
            } else if (i == leader && w > 0.0) {
                out.push_back({Kind::LeaderHasInput, i, j,
                               edge_name(i, j) + ": leader row must be all zero"});
            }
        }
    }

    // Breadth-first search from the leader along j -> i edges.
    std::vector<bool> reached(n, false);
    std::deque<AgentId> frontier{leader};
    reached[leader] = true;
    while (!frontier.empty()) {
        const AgentId j = frontier.front();
        frontier.pop_front();
        for (AgentId i = 0; i < n; ++i) {
            if (!reached[i] && i != j && topology.weight(i, j) > 0.0) {
                reached[i] = true;
                frontier.push_back(i);
            }
        }
    }
    for (AgentId i = 0; i < n; ++i) {
        if (!reached[i]) {
            out.push_back({Kind::UnreachableFollower, i, leader,
                           "uav" + std::to_string(i + 1) + " has no directed path from leader uav" +
                               std::to_string(leader + 1)});
        }
    }
    return out;
}

}  // namespace swarmsim
