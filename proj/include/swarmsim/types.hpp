#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace swarmsim {

using Vec3 = Eigen::Vector3d;

// 0-based internally; files, logs and the wire protocol use 1-based ids with
// 0 reserved for the ground station.
using AgentId = std::size_t;
using Tick = std::uint64_t;

inline constexpr AgentId kGroundStation = std::numeric_limits<AgentId>::max();

inline std::uint64_t external_id(AgentId id) { return id == kGroundStation ? 0 : id + 1; }

inline AgentId internal_id(std::uint64_t external) {
    return external == 0 ? kGroundStation : static_cast<AgentId>(external - 1);
}

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

/// Raised when the engine detects a corrupt state and the run cannot continue.
class SimHalt : public std::runtime_error {
public:
    SimHalt(AgentId agent, std::string phase, const std::string& what)
        : std::runtime_error("halt in phase " + phase + " for uav" +
                             std::to_string(external_id(agent)) + ": " + what),
          agent_(agent), phase_(std::move(phase)) {}

    AgentId agent() const noexcept { return agent_; }
    const std::string& phase() const noexcept { return phase_; }

private:
    AgentId agent_;
    std::string phase_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace swarmsim
