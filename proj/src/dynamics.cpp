#include "swarmsim/dynamics.hpp"

namespace swarmsim {

Vec3 saturate(const Vec3& desired, double max_speed) {
    const double norm = desired.norm();
    if (norm <= max_speed) return desired;
    return desired * (max_speed / norm);
}

AgentState integrate(const AgentState& state, const Vec3& velocity, double dt) {
    if (!is_finite(state.position)) throw SimHalt(state.id, "Integrate", "non-finite position");
    if (!is_finite(velocity)) throw SimHalt(state.id, "Integrate", "non-finite velocity command");
    AgentState next = state;
    next.position = state.position + velocity * dt;
    next.velocity = velocity;
    return next;
}

}  // namespace swarmsim
