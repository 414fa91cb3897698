#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <numeric>
#include <vector>

#include "swarmsim/assignment.hpp"
#include "swarmsim/scenario.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return SWARMSIM_SOURCE_DIR; }
inline std::filesystem::path scenario_path(const std::string& name) {
    return source_dir() / "scenarios" / (name + ".json");
}
inline swarmsim::ScenarioConfig scenario(const std::string& name) {
    return swarmsim::load_scenario(scenario_path(name)).config;
}

// Exhaustive oracle: cheapest total over every permutation.
inline double brute_force_min(const swarmsim::CostMatrix& c) {
    std::vector<std::size_t> perm(c.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) total += c(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace testing_support
