#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmsim/topology.hpp"
#include "swarmsim/types.hpp"

namespace swarmsim {

/// Named set of formation offsets (slots). Exactly one slot sits at the
/// origin; that slot belongs to the leader and fixes the formation frame.
struct FormationSpec {
    std::string name;
    std::vector<Vec3> offsets;

    std::size_t size() const noexcept { return offsets.size(); }
    /// Index of the origin slot, if exactly one exists.
    std::optional<std::size_t> leader_slot() const;
};

inline constexpr double kDefaultMinSeparation = 1.0;

/// Problems with the spec (missing/duplicate origin slot, slots closer than
/// min_separation, non-finite coordinates). Empty means valid.
std::vector<std::string> check_formation(const FormationSpec& spec, double min_separation = kDefaultMinSeparation);

/// Built-in library: {T, diamond} for 6 agents and {cube, pyramid, triangle}
/// for 9. Any other count returns an empty list; supply offsets in the
/// scenario file instead.
std::vector<FormationSpec> builtin_formations(std::size_t n);
std::optional<FormationSpec> find_builtin(std::size_t n, const std::string& name);

/// Reads `{"name": ..., "offsets": [[x,y,z], ...]}`. Throws ConfigError.
FormationSpec load_formation_file(const std::filesystem::path& path);

struct NeighborReport {
    AgentId id;
    Vec3 position;
};

struct ConsensusOutput {
    Vec3 velocity = Vec3::Zero();
    /// In-neighbors with no report this tick; their terms were skipped.
    std::vector<AgentId> missing;
};

/// u_i = -gain * sum_j w_ij [(xi_i - delta_i) - (xi_j - delta_j)] over the
/// in-neighbors of i. `offsets` holds each agent's assigned offset, indexed
/// by agent id.
ConsensusOutput consensus_velocity(AgentId i, const Vec3& self_position, std::span<const NeighborReport> neighbors,
                                   const TopologyMatrix& topology, std::span<const Vec3> offsets, double gain = 1.0);

struct PairError {
    AgentId i;
    AgentId j;
    double error;
};

struct FormationError {
    std::vector<PairError> pairs;
    double max_error = 0.0;
};

/// Global all-pairs formation error ||(xi_i - delta_i) - (xi_j - delta_j)||.
/// A test metric; agents never see it.
FormationError formation_error(std::span<const Vec3> positions, std::span<const Vec3> offsets);

/// Same metric without materialising the pair list.
double max_formation_error(std::span<const Vec3> positions, std::span<const Vec3> offsets);

}  // namespace swarmsim
