#pragma once

#include <optional>
#include <span>
#include <vector>

#include "swarmsim/bus.hpp"
#include "swarmsim/dynamics.hpp"
#include "swarmsim/rng.hpp"

namespace swarmsim {

/// Axis-aligned ground rectangle, meters.
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 0.0;
    double height = 0.0;

    double x1() const { return x0 + width; }
    double y1() const { return y0 + height; }
    double area() const { return width * height; }
    bool contains(double x, double y, double eps = 1e-9) const {
        return x >= x0 - eps && x <= x1() + eps && y >= y0 - eps && y <= y1() + eps;
    }
};

struct SearchRegion {
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 0.0;
    double height = 0.0;
    double altitude = 5.0;

    Rect rect() const { return {x0, y0, width, height}; }
};

struct SearchCell {
    AgentId agent;
    Rect rect;
    std::vector<Vec3> waypoints;
};

using SearchPlan = std::vector<SearchCell>;

/// n vertical strips of equal width; strip k goes to agent k. Strip edges are
/// computed as x0 + width*k/n so neighbouring strips share exact boundaries.
std::vector<SearchCell> decompose(const SearchRegion& region, std::size_t n);

/// Boustrophedon sweep: ceil(short/swath)+1 tracks parallel to the long side,
/// evenly spaced from edge to edge (spacing <= swath), alternating direction.
/// Throws std::invalid_argument for a non-positive swath.
std::vector<Vec3> lawnmower(const Rect& cell, double swath, double altitude);

/// decompose + lawnmower for every cell.
SearchPlan plan_search(const SearchRegion& region, std::size_t n, double swath);

/// Sum of leg lengths from `start` through every waypoint.
double path_length(const Vec3& start, std::span<const Vec3> waypoints);

inline constexpr double kDefaultAcceptRadius = 0.5;

/// Velocity of magnitude max_speed toward waypoint `index`, advancing `index`
/// past every waypoint already within accept_radius. Zero once the plan is
/// exhausted.
Vec3 track_waypoints(const AgentState& state, std::span<const Vec3> plan, std::size_t& index, double accept_radius,
                     double max_speed);

/// Synthetic footprint detector: when the target is within footprint_radius
/// horizontally, reports with probability p_detect (one draw per call).
std::optional<DetectionReport> detect(const AgentState& state, const Vec3& target, double footprint_radius,
                                      double p_detect, SimRng& rng, Tick tick);

}  // namespace swarmsim
