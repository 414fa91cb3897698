#include "swarmsim/mission.hpp"

#include <cmath>
#include <stdexcept>

namespace swarmsim {

std::vector<SearchCell> decompose(const SearchRegion& region, std::size_t n) {
    std::vector<SearchCell> cells;
    if (n == 0) return cells;
    const double dn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double left = region.x0 + region.width * static_cast<double>(k) / dn;
        const double right = k + 1 == n ? region.x0 + region.width : region.x0 + region.width * static_cast<double>(k + 1) / dn;
        cells.push_back({k, Rect{left, region.y0, right - left, region.height}, {}});
    }
    return cells;
}

std::vector<Vec3> lawnmower(const Rect& cell, double swath, double altitude) {
    if (!(swath > 0.0) || !std::isfinite(swath)) throw std::invalid_argument("swath must be a positive finite width");
    const bool tracks_along_y = cell.height >= cell.width;
    const double across = tracks_along_y ? cell.width : cell.height;
    // The small slack keeps exact multiples (10 / 5) from rounding up.
    const auto tracks = static_cast<std::size_t>(std::ceil(across / swath - 1e-9)) + 1;

    std::vector<Vec3> out;
    out.reserve(2 * tracks);
    for (std::size_t k = 0; k < tracks; ++k) {
        const double offset = across * static_cast<double>(k) / static_cast<double>(tracks - 1);
        const bool forward = k % 2 == 0;
        if (tracks_along_y) {
            const double x = k + 1 == tracks ? cell.x1() : cell.x0 + offset;
            out.emplace_back(x, forward ? cell.y0 : cell.y1(), altitude);
            out.emplace_back(x, forward ? cell.y1() : cell.y0, altitude);
        } else {
            const double y = k + 1 == tracks ? cell.y1() : cell.y0 + offset;
            out.emplace_back(forward ? cell.x0 : cell.x1(), y, altitude);
            out.emplace_back(forward ? cell.x1() : cell.x0, y, altitude);
        }
    }
    return out;
}

SearchPlan plan_search(const SearchRegion& region, std::size_t n, double swath) {
    auto cells = decompose(region, n);
    for (auto& cell : cells) cell.waypoints = lawnmower(cell.rect, swath, region.altitude);
    return cells;
}

double path_length(const Vec3& start, std::span<const Vec3> waypoints) {
    double total = 0.0;
    Vec3 at = start;
    for (const auto& wp : waypoints) {
        total += (wp - at).norm();
        at = wp;
    }
    return total;
}

Vec3 track_waypoints(const AgentState& state, std::span<const Vec3> plan, std::size_t& index, double accept_radius,
                     double max_speed) {
    while (index < plan.size() && (plan[index] - state.position).norm() <= accept_radius) ++index;
    if (index >= plan.size()) return Vec3::Zero();
    const Vec3 to_go = plan[index] - state.position;
    return to_go * (max_speed / to_go.norm());
}

std::optional<DetectionReport> detect(const AgentState& state, const Vec3& target, double footprint_radius,
                                      double p_detect, SimRng& rng, Tick tick) {
    const double dx = state.position.x() - target.x();
    const double dy = state.position.y() - target.y();
    if (std::hypot(dx, dy) > footprint_radius) return std::nullopt;
    if (!rng.bernoulli(p_detect)) return std::nullopt;
    return DetectionReport{state.id, target, tick};
}

}  // namespace swarmsim
