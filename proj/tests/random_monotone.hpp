#pragma once

#include <algorithm>
#include <random>

#include "rb/core.hpp"

namespace rb::test {

struct MonotoneShape {
    int max_arms = 4;
    int max_states = 4;
    int max_breakpoints = 12;
    int max_gap = 2;  // largest step between consecutive breakpoint times
    int M = 1;
    int max_duration = 1;
    double max_cost = 0.0;  // c_i and s_i drawn from [0, max_cost]
};

inline MonotoneInstance random_monotone(std::mt19937_64& rng, const MonotoneShape& sh) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
    MonotoneInstance inst;
    inst.M = sh.M;
    int n = pick(std::max(1, sh.M), std::max(sh.max_arms, sh.M));
    for (int i = 0; i < n; ++i) {
        MonotoneArm a;
        int K = pick(1, sh.max_states);
        for (int k = 0; k < K; ++k) {
            MonotoneState s;
            s.r = U(rng);
            s.duration = pick(1, sh.max_duration);
            int nb = pick(1, sh.max_breakpoints);
            std::vector<std::pair<std::int64_t, double>> bp;
            std::int64_t t = 1;
            double f = 0.15 * U(rng);
            for (int b = 0; b < nb; ++b) {
                bp.emplace_back(t, f);
                t += pick(1, sh.max_gap);
                f = std::min(1.0, f + 0.25 * U(rng));
            }
            s.f = PiecewiseLinearMonotone(bp);
            a.states.push_back(s);
        }
        a.q.assign(K, std::vector<double>(K, 0.0));
        for (int k = 0; k < K && K > 1; ++k) {
            double row = 0.0;
            for (int j = 0; j < K; ++j) {
                if (j == k) continue;
                // the cycle k -> k+1 keeps the graph strongly connected
                double w = (j == (k + 1) % K) ? 0.2 + U(rng) : (U(rng) < 0.5 ? U(rng) : 0.0);
                a.q[k][j] = w;
                row += w;
            }
            for (int j = 0; j < K; ++j) a.q[k][j] /= row;
        }
        inst.arms.push_back(a);
    }
    if (sh.max_cost > 0.0) {
        for (int i = 0; i < n; ++i) {
            inst.switch_out.push_back(sh.max_cost * U(rng));
            inst.switch_in.push_back(sh.max_cost * U(rng));
        }
    }
    return inst;
}

}  // namespace rb::test
