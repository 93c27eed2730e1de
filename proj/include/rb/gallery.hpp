#pragma once

#include <string>

#include "json.hpp"
#include "rb/core.hpp"

namespace rb {

// Two-state stand-in for an arm that is always in g: alpha = 1 - delta - beta0, beta = beta0.
FeedbackArm deterministic_arm(double r = 1.0, double delta = kDefaultDelta, double beta0 = 1e-9);

// one deterministic arm (next-step reward 1) plus n arms with r = n, beta = 2^-n, stationary g-probability 1/n
FeedbackInstance myopic_gap(int n);

// deterministic arm r = 1 plus two arms alpha = beta = 0.1, r = 2
FeedbackInstance index_gap();

struct LpGap {
    FeedbackInstance instance;
    double complete_info_bound = 0.0;  // 1 - (1 - 1/n)^n
};
LpGap lp_gap(int n, double beta);

// three-state identical arms with non-separable transitions; no solver accepts this shape
nlohmann::json nonseparable_gap(int n);

// two machines: s1 = n^-4, p1 = 1/n, s2 = 1, p2 = 1, unit rewards, zero costs, M = 1
ReplenishInstance replenish_gap(int n);

}  // namespace rb
