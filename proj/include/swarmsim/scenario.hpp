#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmsim/avoidance.hpp"
#include "swarmsim/commands.hpp"
#include "swarmsim/formation.hpp"
#include "swarmsim/mission.hpp"
#include "swarmsim/topology.hpp"

namespace swarmsim {

struct RandomPlacement {
    Vec3 center = Vec3::Zero();
    double size = 20.0;  // edge of the cube positions are drawn from
    double min_spacing = 0.0;  // redraw a position closer than this to an earlier one
};

struct MissionConfig {
    SearchRegion region;
    double swath = 5.0;
    std::optional<Vec3> target;  // nullopt: drawn from the run's seeded stream
    double p_detect = 0.9;
    double footprint_radius = 5.0;
    double accept_radius = kDefaultAcceptRadius;
};

struct StopConditions {
    std::optional<Tick> max_ticks;
    std::optional<double> max_time;
    bool on_mission_complete = true;
};

/// Fully resolved description of a run. Formation files are inlined and all
/// defaults are filled, so to_json() is self-contained and canonical.
struct ScenarioConfig {
    std::string name = "scenario";
    double dt = 0.02;
    std::uint64_t seed = 0;
    double speed_factor = 0.0;  // 0 = free-run

    std::size_t agent_count = 0;
    double max_speed = kDefaultMaxSpeed;
    AgentId leader = 0;
    std::vector<Vec3> initial_positions;         // explicit placement, or
    std::optional<RandomPlacement> random_start;  // drawn at start

    TopologyMatrix topology;
    nlohmann::json topology_source;  // the block as written (preset or matrix)

    std::vector<FormationSpec> formations;
    std::optional<std::string> initial_formation;
    bool assign_initial = true;
    double gain = 1.0;
    double min_separation = kDefaultMinSeparation;

    AvoidanceConfig avoidance;
    double separation_threshold = 1.5;  // 0.5 * b unless overridden

    std::optional<MissionConfig> mission;
    StopConditions stop;
    std::uint64_t snapshot_every = 1;
    std::uint64_t stream_every = 5;
    std::vector<ScheduledCommand> commands;

    const FormationSpec* find_formation(const std::string& formation) const;
    /// Tick budget implied by max_ticks / max_time, whichever is smaller.
    std::optional<Tick> tick_limit() const;

    nlohmann::json to_json() const;
};

/// Schema violations, each prefixed with the JSON pointer of the offending
/// value (or line:column for syntax errors).
class ScenarioError : public ConfigError {
public:
    explicit ScenarioError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct LoadedScenario {
    ScenarioConfig config;
    std::vector<std::string> warnings;
};

/// Validates a scenario document. Relative formation file paths resolve
/// against base_dir. Throws ScenarioError listing every problem found.
LoadedScenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
LoadedScenario load_scenario(const std::filesystem::path& path);

/// Pairs of explicit initial positions closer than the minimum separation.
std::vector<std::string> initial_separation_warnings(const std::vector<Vec3>& positions, double min_separation);

}  // namespace swarmsim
