#pragma once

#include <cstdint>
#include <list>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "rb/core.hpp"

namespace rb {

// Pi(b,t): largest penalty at which the single-arm optimum plays by waiting time t
double whittle_index_b(const FeedbackArm& arm, std::int64_t t, double tol = 1e-9);
// Pi(g,t) = r u_t / (beta + u_t); equals r(1 - beta) at t = 1
double whittle_index_g(const FeedbackArm& arm, std::int64_t t);
double whittle_index(const FeedbackArm& arm, const BeliefState& s);

class WhittleIndexTable {
public:
    explicit WhittleIndexTable(std::vector<FeedbackArm> arms, std::size_t capacity = 1000000);

    double index(int arm, const BeliefState& s) const;
    double index_g1(int arm) const { return arms_[arm].r * (1.0 - arms_[arm].beta); }
    const std::vector<FeedbackArm>& arms() const { return arms_; }
    std::size_t cached() const;

private:
    using Key = std::uint64_t;
    std::vector<FeedbackArm> arms_;
    std::size_t capacity_;
    mutable std::mutex mu_;
    mutable std::list<std::pair<Key, double>> lru_;
    mutable std::unordered_map<Key, std::list<std::pair<Key, double>>::iterator> map_;
};

int threshold_whittle_next(double lambda_star, const WhittleIndexTable& table, const std::vector<BeliefState>& beliefs);
int plain_whittle_next(const WhittleIndexTable& table, const std::vector<BeliefState>& beliefs);

}  // namespace rb
