#pragma once

#include <random>

#include "rb/core.hpp"

namespace rb::test {

inline ReplenishInstance random_replenish(std::mt19937_64& rng, int max_machines = 3, int max_states = 3,
                                          int max_M = 1) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ReplenishInstance inst;
    int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_machines));
    inst.M = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_M));
    for (int i = 0; i < n; ++i) {
        Machine m;
        int K = 2 + static_cast<int>(rng() % static_cast<unsigned>(max_states - 1));
        double r = 1.0 + U(rng);
        for (int u = 0; u < K; ++u) {
            m.reward.push_back(r);
            r *= 0.3 + 0.5 * U(rng);  // wear lowers the reward
            m.repair_cost.push_back(u == 0 ? 0.0 : 0.3 * U(rng));
        }
        m.p.assign(K, std::vector<double>(K, 0.0));
        for (int u = 0; u < K; ++u) {
            double row = 0.0;
            for (int v = u; v < K; ++v) {
                m.p[u][v] = (v == u ? 1.0 : 0.0) + U(rng);
                row += m.p[u][v];
            }
            for (int v = u; v < K; ++v) m.p[u][v] /= row;
        }
        m.s = 0.1 + 0.9 * U(rng);
        m.rho = 0;
        inst.machines.push_back(m);
    }
    return inst;
}

}  // namespace rb::test
