#include "swarmsim/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarmsim {

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    CostMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw std::invalid_argument("cost matrix must be square");
        for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::vector<double>> CostMatrix::rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
    return out;
}

bool is_permutation(std::span<const std::size_t> perm) {
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t p : perm) {
        if (p >= perm.size() || seen[p]) return false;
        seen[p] = true;
    }
    return true;
}

double assignment_cost(const CostMatrix& cost, std::span<const std::size_t> perm) {
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) total += cost(i, perm[i]);
    return total;
}

// Shortest augmenting path with row/column potentials. Rows are inserted in
// ascending order and the first minimum column wins, so ties resolve towards
// lower follower indices deterministically.
Assignment solve(const CostMatrix& cost) {
    const std::size_t n = cost.size();
    Assignment out;
    if (n == 0) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = row_of_col[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (reduced < minv[j]) {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    out.permutation.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) out.permutation[row_of_col[j] - 1] = j - 1;
    out.total_cost = assignment_cost(cost, out.permutation);
    return out;
}

// Feasible labelling lx[x] + ly[y] >= w[x][y]; each root grows an alternating
// tree over tight edges, relabelling by the minimum slack until it reaches a
// free right vertex.
Assignment solve_max_weight(const std::vector<std::vector<double>>& weight) {
    const std::size_t n = weight.size();
    Assignment out;
    if (n == 0) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    // Index 0 on the right side is a virtual column holding the current root.
    std::vector<double> lx(n, -inf), ly(n + 1, 0.0);
    std::vector<std::size_t> match_right(n + 1, none);
    for (std::size_t x = 0; x < n; ++x) lx[x] = *std::max_element(weight[x].begin(), weight[x].end());

    for (std::size_t root = 0; root < n; ++root) {
        std::vector<double> slack(n + 1, inf);
        std::vector<std::size_t> pre(n + 1, 0);
        std::vector<bool> in_tree(n + 1, false);
        std::size_t y = 0;
        match_right[0] = root;
        do {
            in_tree[y] = true;
            const std::size_t x = match_right[y];
            double delta = inf;
            std::size_t next = 0;
            for (std::size_t c = 1; c <= n; ++c) {
                if (in_tree[c]) continue;
                const double gap = lx[x] + ly[c] - weight[x][c - 1];
                if (gap < slack[c]) {
                    slack[c] = gap;
                    pre[c] = y;
                }
                if (slack[c] < delta) {
                    delta = slack[c];
                    next = c;
                }
            }
            for (std::size_t c = 0; c <= n; ++c) {
                if (in_tree[c]) {
                    lx[match_right[c]] -= delta;
                    ly[c] += delta;
                } else {
                    slack[c] -= delta;
                }
            }
            y = next;
        } while (match_right[y] != none);
        while (y != 0) {
            match_right[y] = match_right[pre[y]];
            y = pre[y];
        }
    }

    out.permutation.assign(n, 0);
    for (std::size_t c = 1; c <= n; ++c) out.permutation[match_right[c]] = c - 1;
    for (std::size_t x = 0; x < n; ++x) out.total_cost += weight[x][out.permutation[x]];
    return out;
}

ReconfigurationProblem build_cost_matrix(std::span<const Vec3> positions, AgentId leader, const FormationSpec& target) {
    ReconfigurationProblem problem;
    const auto leader_slot = target.leader_slot();
    for (AgentId i = 0; i < positions.size(); ++i)
        if (i != leader) problem.followers.push_back(i);
    for (std::size_t k = 0; k < target.size(); ++k)
        if (!leader_slot || k != *leader_slot) problem.slots.push_back(k);

    const std::size_t n = std::min(problem.followers.size(), problem.slots.size());
    problem.cost = CostMatrix(n);
    for (std::size_t r = 0; r < n; ++r) {
        const Vec3 rel = positions[problem.followers[r]] - positions[leader];
        for (std::size_t c = 0; c < n; ++c) problem.cost(r, c) = (rel - target.offsets[problem.slots[c]]).norm();
    }
    return problem;
}

std::vector<Vec3> AssignmentTable::offsets_by_agent(std::size_t n) const {
    std::vector<Vec3> out(n, Vec3::Zero());
    for (const auto& e : entries)
        if (e.agent < n) out[e.agent] = e.offset;
    return out;
}

std::vector<std::size_t> AssignmentTable::slots_by_agent(std::size_t n) const {
    std::vector<std::size_t> out(n, 0);
    for (const auto& e : entries)
        if (e.agent < n) out[e.agent] = e.slot;
    return out;
}

namespace {

std::optional<std::string> shape_mismatch(const FormationSpec& target, std::size_t n, AgentId leader) {
    if (target.size() != n) {
        return "formation '" + target.name + "' has " + std::to_string(target.size()) + " slots but the swarm has " +
               std::to_string(n) + " agents";
    }
    if (!target.leader_slot()) return "formation '" + target.name + "' has no unique origin slot for the leader";
    if (leader >= n) return "leader id out of range";
    return std::nullopt;
}

}  // namespace

std::variant<AssignmentTable, ReconfigureRejected> reconfigure(const FormationSpec& target,
                                                                std::span<const Vec3> positions, AgentId leader) {
    if (auto why = shape_mismatch(target, positions.size(), leader)) return ReconfigureRejected{*why};

    const auto problem = build_cost_matrix(positions, leader, target);
    const auto solution = solve(problem.cost);

    AssignmentTable table;
    table.formation = target.name;
    table.total_cost = solution.total_cost;
    const std::size_t origin = *target.leader_slot();
    table.entries.push_back({leader, origin, target.offsets[origin]});
    for (std::size_t r = 0; r < problem.followers.size(); ++r) {
        const std::size_t slot = problem.slots[solution.permutation[r]];
        table.entries.push_back({problem.followers[r], slot, target.offsets[slot]});
    }
    return table;
}

AssignmentTable identity_assignment(const FormationSpec& target, std::size_t n, AgentId leader) {
    if (auto why = shape_mismatch(target, n, leader)) throw ConfigError(*why);
    AssignmentTable table;
    table.formation = target.name;
    const std::size_t origin = *target.leader_slot();
    table.entries.push_back({leader, origin, target.offsets[origin]});
    std::size_t k = 0;
    for (AgentId i = 0; i < n; ++i) {
        if (i == leader) continue;
        if (k == origin) ++k;
        table.entries.push_back({i, k, target.offsets[k]});
        ++k;
    }
    return table;
}

}  // namespace swarmsim
