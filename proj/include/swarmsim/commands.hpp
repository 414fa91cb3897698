#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmsim/types.hpp"

namespace swarmsim {

/// Speed factor meaning "as fast as possible".
inline constexpr double kFreeRun = std::numeric_limits<double>::infinity();

/// Operator command, applied only at a tick boundary.
struct SwarmCommand {
    enum class Kind { SetFormation, LeaderVelocity, Pause, Resume, SetSpeed, Stop };

    Kind kind = Kind::Pause;
    std::string formation;            // SetFormation
    Vec3 velocity = Vec3::Zero();     // LeaderVelocity
    double speed_factor = 1.0;        // SetSpeed; kFreeRun = no pacing

    static SwarmCommand make(Kind kind) {
        SwarmCommand c;
        c.kind = kind;
        return c;
    }
    static SwarmCommand set_formation(std::string name) {
        auto c = make(Kind::SetFormation);
        c.formation = std::move(name);
        return c;
    }
    static SwarmCommand leader_velocity(const Vec3& v) {
        auto c = make(Kind::LeaderVelocity);
        c.velocity = v;
        return c;
    }
    static SwarmCommand pause() { return make(Kind::Pause); }
    static SwarmCommand resume() { return make(Kind::Resume); }
    static SwarmCommand set_speed(double factor) {
        auto c = make(Kind::SetSpeed);
        c.speed_factor = factor;
        return c;
    }
    static SwarmCommand stop() { return make(Kind::Stop); }

    /// Engine-level controls that never touch the swarm state.
    bool is_control() const { return kind == Kind::Pause || kind == Kind::Resume || kind == Kind::SetSpeed || kind == Kind::Stop; }

    friend bool operator==(const SwarmCommand& a, const SwarmCommand& b) {
        return a.kind == b.kind && a.formation == b.formation && a.velocity == b.velocity &&
               a.speed_factor == b.speed_factor;
    }
};

struct ScheduledCommand {
    Tick tick = 0;
    SwarmCommand command;

    friend bool operator==(const ScheduledCommand&, const ScheduledCommand&) = default;
};

class CommandError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// {"kind": "set_formation", "name": ...} | {"kind": "leader_velocity", "velocity": [x,y,z]}
/// | {"kind": "pause"} | {"kind": "resume"} | {"kind": "set_speed", "factor": f | "free"} | {"kind": "stop"}
nlohmann::json command_to_json(const SwarmCommand& command);
/// Throws CommandError on a malformed body, including a non-positive speed
/// factor.
SwarmCommand command_from_json(const nlohmann::json& j);

/// Script: JSON array of command objects each carrying a "tick" field.
std::vector<ScheduledCommand> commands_from_json(const nlohmann::json& j);
std::vector<ScheduledCommand> load_command_script(const std::filesystem::path& path);

}  // namespace swarmsim
