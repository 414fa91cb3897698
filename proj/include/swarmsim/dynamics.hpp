#pragma once

#include "swarmsim/types.hpp"

namespace swarmsim {

/// Position and last applied velocity of one UAV.
struct AgentState {
    AgentId id = 0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
};

struct VelocityCommand {
    AgentId target = 0;
    Vec3 desired = Vec3::Zero();
    Tick tick_issued = 0;
};

inline constexpr double kDefaultMaxSpeed = 2.0;

/// Scales `desired` down to magnitude `max_speed` if it is longer; direction kept.
Vec3 saturate(const Vec3& desired, double max_speed);

/// One forward-Euler step of the first-order integrator. Throws SimHalt on
/// non-finite input.
AgentState integrate(const AgentState& state, const Vec3& velocity, double dt);

}  // namespace swarmsim
