#include "swarmsim/formation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace swarmsim {

std::optional<std::size_t> FormationSpec::leader_slot() const {
    std::optional<std::size_t> found;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        if (offsets[k].isZero(0.0)) {
            if (found) return std::nullopt;
            found = k;
        }
    }
    return found;
}

std::vector<std::string> check_formation(const FormationSpec& spec, double min_separation) {
    std::vector<std::string> problems;
    std::size_t origin_slots = 0;
    for (std::size_t k = 0; k < spec.offsets.size(); ++k) {
        if (!is_finite(spec.offsets[k])) problems.push_back("offset " + std::to_string(k + 1) + " is not finite");
        if (spec.offsets[k].isZero(0.0)) ++origin_slots;
    }
    if (origin_slots != 1) {
        problems.push_back("formation '" + spec.name + "' needs exactly one origin (leader) slot, found " +
                           std::to_string(origin_slots));
    }
    for (std::size_t a = 0; a < spec.offsets.size(); ++a) {
        for (std::size_t b = a + 1; b < spec.offsets.size(); ++b) {
            const double d = (spec.offsets[a] - spec.offsets[b]).norm();
            if (d < min_separation) {
                problems.push_back("offsets " + std::to_string(a + 1) + " and " + std::to_string(b + 1) + " are " +
                                   std::to_string(d) + " m apart, below " + std::to_string(min_separation) + " m");
            }
        }
    }
    return problems;
}

// Coordinates use a 2 m grid. The 9-agent shapes keep every pair at least
// 2*sqrt(3) m apart so the default 3 m avoidance range is silent at rest.
std::vector<FormationSpec> builtin_formations(std::size_t n) {
    if (n == 6) {
        return {
            {"T", {{0, 0, 0}, {-2, 0, 0}, {2, 0, 0}, {0, 0, -2}, {0, 0, -4}, {0, 0, -6}}},
            {"diamond", {{0, 0, 0}, {2, 0, -2}, {0, 2, -2}, {-2, 0, -2}, {0, -2, -2}, {0, 0, -4}}},
        };
    }
    if (n == 9) {
        return {
            {"cube",
             {{0, 0, 0},
              {-2, -2, -2},
              {2, -2, -2},
              {-2, 2, -2},
              {2, 2, -2},
              {-2, -2, 2},
              {2, -2, 2},
              {-2, 2, 2},
              {2, 2, 2}}},
            {"pyramid",
             {{0, 0, 0},
              {-2, -2, -2},
              {2, -2, -2},
              {-2, 2, -2},
              {2, 2, -2},
              {-4, -4, -4},
              {4, -4, -4},
              {-4, 4, -4},
              {4, 4, -4}}},
            {"triangle",
             {{0, 0, 0},
              {-4, -2, 0},
              {-4, 2, 0},
              {-8, -4, 0},
              {-8, 4, 0},
              {-12, -6, 0},
              {-12, 6, 0},
              {-12, -2, 0},
              {-12, 2, 0}}},
        };
    }
    return {};
}

std::optional<FormationSpec> find_builtin(std::size_t n, const std::string& name) {
    for (auto& spec : builtin_formations(n)) {
        if (spec.name == name) return spec;
    }
    return std::nullopt;
}

FormationSpec load_formation_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read formation file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    FormationSpec spec;
    if (!doc.contains("name") || !doc["name"].is_string()) throw ConfigError(path.string() + ": missing string 'name'");
    if (!doc.contains("offsets") || !doc["offsets"].is_array())
        throw ConfigError(path.string() + ": missing array 'offsets'");
    spec.name = doc["name"].get<std::string>();
    for (const auto& row : doc["offsets"]) {
        if (!row.is_array() || row.size() != 3 || !std::all_of(row.begin(), row.end(), [](auto& v) { return v.is_number(); }))
            throw ConfigError(path.string() + ": offsets must be [x, y, z] number triples");
        spec.offsets.emplace_back(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
    }
    return spec;
}

ConsensusOutput consensus_velocity(AgentId i, const Vec3& self_position, std::span<const NeighborReport> neighbors,
                                   const TopologyMatrix& topology, std::span<const Vec3> offsets, double gain) {
    ConsensusOutput out;
    const Vec3 self_frame = self_position - offsets[i];
    for (AgentId j = 0; j < topology.size(); ++j) {
        const double w = topology.weight(i, j);
        if (w <= 0.0 || j == i) continue;
        auto it = std::find_if(neighbors.begin(), neighbors.end(), [j](const NeighborReport& r) { return r.id == j; });
        if (it == neighbors.end()) {
            out.missing.push_back(j);
            continue;
        }
        out.velocity -= w * (self_frame - (it->position - offsets[j]));
    }
    out.velocity *= gain;
    return out;
}

FormationError formation_error(std::span<const Vec3> positions, std::span<const Vec3> offsets) {
    FormationError out;
    for (AgentId i = 0; i < positions.size(); ++i) {
        for (AgentId j = i + 1; j < positions.size(); ++j) {
            const double e = ((positions[i] - offsets[i]) - (positions[j] - offsets[j])).norm();
            out.pairs.push_back({i, j, e});
            out.max_error = std::max(out.max_error, e);
        }
    }
    return out;
}

double max_formation_error(std::span<const Vec3> positions, std::span<const Vec3> offsets) {
    double best = 0.0;
    for (AgentId i = 0; i < positions.size(); ++i)
        for (AgentId j = i + 1; j < positions.size(); ++j)
            best = std::max(best, ((positions[i] - offsets[i]) - (positions[j] - offsets[j])).norm());
    return best;
}

}  // namespace swarmsim
