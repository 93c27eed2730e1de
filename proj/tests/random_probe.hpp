#pragma once

#include <random>

#include "rb/core.hpp"

namespace rb::test {

inline ProbeInstance random_probe(std::mt19937_64& rng, int max_arms = 4, int max_M = 2, double cost_scale = 0.5) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ProbeInstance inst;
    int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_arms));
    inst.M = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_M));
    if (inst.M > n) inst.M = n;
    for (int i = 0; i < n; ++i) {
        FeedbackArm a(0.03 + 0.3 * U(rng), 0.03 + 0.3 * U(rng), 0.2 + 2.0 * U(rng));
        inst.arms.push_back({a, cost_scale * a.r * U(rng)});
    }
    return inst;
}

}  // namespace rb::test
