#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "swarmsim/dynamics.hpp"
#include "swarmsim/formation.hpp"

namespace swarmsim {

/// Square matrix of non-negative travel distances, row = follower, column = slot.
class CostMatrix {
public:
    CostMatrix() = default;
    explicit CostMatrix(std::size_t n) : n_(n), c_(n * n, 0.0) {}
    static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t row, std::size_t col) const { return c_[row * n_ + col]; }
    double& operator()(std::size_t row, std::size_t col) { return c_[row * n_ + col]; }

    std::vector<std::vector<double>> rows() const;

private:
    std::size_t n_ = 0;
    std::vector<double> c_;
};

struct Assignment {
    std::vector<std::size_t> permutation;  // column per row
    double total_cost = 0.0;
};

/// Minimum-cost perfect matching (Hungarian method with potentials), O(n^3).
Assignment solve(const CostMatrix& cost);

/// Maximum-weight perfect matching via the classic Kuhn-Munkres vertex
/// labelling. Running it on negated distances gives the min-cost matching;
/// kept as a separate route so the two can be cross-checked.
Assignment solve_max_weight(const std::vector<std::vector<double>>& weight);

bool is_permutation(std::span<const std::size_t> perm);
double assignment_cost(const CostMatrix& cost, std::span<const std::size_t> perm);

/// Follower rows / slot columns for a reconfiguration. Followers are the
/// non-leader agents in ascending id order; slots are the non-origin slots of
/// `target` in ascending index order. c[i][k] = ||(xi_i - xi_leader) - delta_k||.
struct ReconfigurationProblem {
    std::vector<AgentId> followers;
    std::vector<std::size_t> slots;
    CostMatrix cost;
};

ReconfigurationProblem build_cost_matrix(std::span<const Vec3> positions, AgentId leader, const FormationSpec& target);

struct AssignmentEntry {
    AgentId agent;
    std::size_t slot;
    Vec3 offset;
};

/// Payload broadcast on /leader/assignment.
struct AssignmentTable {
    std::string formation;
    double total_cost = 0.0;
    std::vector<AssignmentEntry> entries;  // leader first, then followers ascending

    /// Offset per agent id.
    std::vector<Vec3> offsets_by_agent(std::size_t n) const;
    /// Slot per agent id.
    std::vector<std::size_t> slots_by_agent(std::size_t n) const;
};

struct ReconfigureRejected {
    std::string reason;
};

/// Leader-side reconfiguration: builds the leader-relative cost matrix,
/// solves it and returns the table. The leader keeps the origin slot.
std::variant<AssignmentTable, ReconfigureRejected> reconfigure(const FormationSpec& target,
                                                                std::span<const Vec3> positions, AgentId leader);

/// Table with follower k (ascending) on the k-th non-origin slot.
AssignmentTable identity_assignment(const FormationSpec& target, std::size_t n, AgentId leader);

}  // namespace swarmsim
