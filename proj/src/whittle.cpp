#include "rb/whittle.hpp"

#include <cmath>

#include "rb/feedback.hpp"

namespace rb {

double whittle_index_b(const FeedbackArm& arm, std::int64_t t, double tol) {
    double lo = 0.0, hi = never_play_threshold(arm);
    if (hi <= 0.0) return 0.0;
    for (int it = 0; it < 200 && hi - lo > tol * 0.1; ++it) {
        double mid = 0.5 * (lo + hi);
        if (single_arm_optimum(arm, mid).t <= t) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double whittle_index_g(const FeedbackArm& arm, std::int64_t t) {
    double u = belief_u(arm, t);
    return arm.r * u / (arm.beta + u);
}

double whittle_index(const FeedbackArm& arm, const BeliefState& s) {
    if (s.last == Obs::g) return s.t == 1 ? arm.r * (1.0 - arm.beta) : whittle_index_g(arm, s.t);
    return whittle_index_b(arm, s.t);
}

WhittleIndexTable::WhittleIndexTable(std::vector<FeedbackArm> arms, std::size_t capacity)
    : arms_(std::move(arms)), capacity_(capacity) {}

std::size_t WhittleIndexTable::cached() const {
    std::lock_guard<std::mutex> lk(mu_);
    return map_.size();
}

double WhittleIndexTable::index(int arm, const BeliefState& s) const {
    if (s.last == Obs::g && s.t == 1) return index_g1(arm);
    // arm id in the top 16 bits, observation tag next, t below
    Key key = (static_cast<Key>(arm) << 48) | (static_cast<Key>(s.last == Obs::g) << 47) |
              (static_cast<Key>(s.t) & ((Key(1) << 47) - 1));
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
    }
    double v = whittle_index(arms_[arm], s);
    std::lock_guard<std::mutex> lk(mu_);
    if (map_.count(key)) return v;
    lru_.emplace_front(key, v);
    map_[key] = lru_.begin();
    if (map_.size() > capacity_) {
        map_.erase(lru_.back().first);
        lru_.pop_back();
    }
    return v;
}

int plain_whittle_next(const WhittleIndexTable& table, const std::vector<BeliefState>& beliefs) {
    int best = -1;
    double bv = -1.0;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        double v = table.index(static_cast<int>(i), beliefs[i]);
        if (v > bv) {
            bv = v;
            best = static_cast<int>(i);
        }
    }
    return best;
}

int threshold_whittle_next(double lambda_star, const WhittleIndexTable& table, const std::vector<BeliefState>& beliefs) {
    for (std::size_t i = 0; i < beliefs.size(); ++i)
        if (beliefs[i].last == Obs::g && beliefs[i].t == 1 && table.index_g1(static_cast<int>(i)) >= lambda_star)
            return static_cast<int>(i);
    return plain_whittle_next(table, beliefs);
}

}  // namespace rb
