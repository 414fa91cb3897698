#pragma once

#include <span>

#include "swarmsim/relative_position.hpp"

namespace swarmsim {

struct AvoidanceConfig {
    bool enabled = true;
    double range = 3.0;  // b, meters
    double kp = 1.0;     // m/s at contact
    Vec3 n1 = Vec3::UnitX();
    Vec3 n2 = Vec3::UnitY();
    /// Selects n1 when r.n1 < r.n2 (signed) instead of |r.n1| < |r.n2|. The
    /// signed test can pick n1 for r along -x, which makes r x n1 vanish.
    bool literal_branch = false;
};

struct AvoidanceOutput {
    Vec3 a = Vec3::Zero();
    /// Reports skipped because r or r x n was (numerically) zero.
    std::size_t degenerate = 0;
};

/// Sum of kp (1 - |r|/b) (r x n) / |r x n| over reports with 0 < |r| <= b.
/// Each term is perpendicular to its r.
AvoidanceOutput avoidance_vector(std::span<const RelativePositionReport> reports, const AvoidanceConfig& config);

/// Single-neighbour term; zero outside range or when degenerate.
Vec3 avoidance_term(const Vec3& r, const AvoidanceConfig& config);

/// saturate(u_consensus + a, max_speed).
Vec3 compose_velocity(const Vec3& consensus, const Vec3& avoidance, double max_speed);

}  // namespace swarmsim
