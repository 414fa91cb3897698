#pragma once

#include <cstdint>
#include <random>

#include "swarmsim/types.hpp"

namespace swarmsim {

/// The single seeded stream of a run. Draws are built from raw 64-bit engine
/// output so sequences do not depend on the standard library's distributions.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    bool bernoulli(double p) { return uniform01() < p; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace swarmsim
