#pragma once

#include <string>
#include <vector>

#include "swarmsim/types.hpp"

namespace swarmsim {

/// Weighted directed communication graph. weight(i, j) > 0 means agent i
/// receives agent j's state (edge j -> i).
class TopologyMatrix {
public:
    TopologyMatrix() = default;
    explicit TopologyMatrix(std::size_t n) : n_(n), w_(n * n, 0.0) {}

    /// Builds from row-major rows; throws ConfigError if not square.
    static TopologyMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return n_; }
    double weight(AgentId receiver, AgentId sender) const { return w_.at(receiver * n_ + sender); }
    void set_weight(AgentId receiver, AgentId sender, double w) { w_.at(receiver * n_ + sender) = w; }

    bool communicates(AgentId receiver, AgentId sender) const { return weight(receiver, sender) > 0.0; }

    /// Senders j with weight(i, j) > 0, ascending.
    std::vector<AgentId> in_neighbors(AgentId i) const;
    bool row_is_zero(AgentId i) const;
    /// Largest row sum of weights.
    double max_weighted_in_degree() const;

    std::vector<std::vector<double>> rows() const;

    friend bool operator==(const TopologyMatrix&, const TopologyMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> w_;
};

/// The 6-UAV leader-following adjacency matrix (leader row all zero, each
/// follower listening to the two agents before it).
TopologyMatrix six_uav_example();

/// Agent i receives unit-weight edges from max(0, i - fan_in) .. i - 1.
/// Agent 0 is the leader.
TopologyMatrix chain_topology(std::size_t n, std::size_t fan_in);

struct TopologyViolation {
    enum class Kind { SelfEdge, InvalidWeight, LeaderHasInput, UnreachableFollower, BadLeader };
    Kind kind;
    AgentId receiver;
    AgentId sender;
    std::string message;
};

/// Checks weights, the leader row and reachability of every follower from
/// the leader. Empty result means the topology is usable.
std::vector<TopologyViolation> validate(const TopologyMatrix& topology, AgentId leader);

}  // namespace swarmsim
