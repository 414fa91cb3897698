#include "swarmsim/avoidance.hpp"

#include <cmath>
#include <Eigen/Geometry>

#include "swarmsim/dynamics.hpp"

namespace swarmsim {

namespace {

constexpr double kDegenerate = 1e-12;

}  // namespace

Vec3 avoidance_term(const Vec3& r, const AvoidanceConfig& config) {
    const double dist = r.norm();
    if (!(dist > kDegenerate) || dist > config.range) return Vec3::Zero();

    const double along1 = r.dot(config.n1);
    const double along2 = r.dot(config.n2);
    const bool use_n1 = config.literal_branch ? along1 < along2 : std::abs(along1) < std::abs(along2);
    const Vec3 side = r.cross(use_n1 ? config.n1 : config.n2);
    const double side_norm = side.norm();
    if (!(side_norm > kDegenerate * dist)) return Vec3::Zero();

    return config.kp * (1.0 - dist / config.range) * (side / side_norm);
}

AvoidanceOutput avoidance_vector(std::span<const RelativePositionReport> reports, const AvoidanceConfig& config) {
    AvoidanceOutput out;
    for (const auto& report : reports) {
        const double dist = report.r.norm();
        if (dist > config.range) continue;
        const Vec3 term = avoidance_term(report.r, config);
        if (term.isZero(0.0) && dist < config.range) {
            ++out.degenerate;
            continue;
        }
        out.a += term;
    }
    return out;
}

Vec3 compose_velocity(const Vec3& consensus, const Vec3& avoidance, double max_speed) {
    return saturate(consensus + avoidance, max_speed);
}

}  // namespace swarmsim
