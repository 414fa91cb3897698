#pragma once

#include "swarmsim/types.hpp"

namespace swarmsim {

/// Ground-truth relative position of `neighbor` as seen from `observer`;
/// r points from the observer toward the neighbor.
struct RelativePositionReport {
    AgentId observer;
    AgentId neighbor;
    Vec3 r;
};

}  // namespace swarmsim
