#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rb/core.hpp"

namespace rb {

// t value meaning "never play from b"
constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

double policy_reward_R(const FeedbackArm& arm, std::int64_t t);
double policy_playrate_Q(const FeedbackArm& arm, std::int64_t t);
double lagrange_value_F(const FeedbackArm& arm, double lambda, std::int64_t t);

// penalty at and above which the arm is never worth playing
double never_play_threshold(const FeedbackArm& arm);

struct SingleArmOpt {
    double H = 0.0;
    std::int64_t t = kNever;
};

SingleArmOpt single_arm_optimum(const FeedbackArm& arm, double lambda);

struct FeedbackArmParams {
    double h = 0.0;
    std::int64_t t = kNever;
    double p = 0.0;
    bool active = false;
};

struct FeedbackPolicyParams {
    double lambda_star = 0.0;   // refined value, satisfies lambda_star < G(lambda_star)
    double lambda_lower = 0.0;  // geometric scan value
    double lambda_upper = 0.0;  // lambda_lower * (1 + eps)
    double eps = 1e-3;
    double G = 0.0;             // sum of h at lambda_star
    std::vector<FeedbackArmParams> arms;
};

double G_of_lambda(const std::vector<FeedbackArm>& arms, double lambda);

FeedbackPolicyParams balanced_lambda(const std::vector<FeedbackArm>& arms, double eps = 1e-3,
                                     bool refine = true);

// per-arm parameters recomputed at an arbitrary multiplier
FeedbackPolicyParams params_at_lambda(const std::vector<FeedbackArm>& arms, double lambda);

// -1 means idle
int balanced_index_next(const FeedbackPolicyParams& params, const std::vector<BeliefState>& beliefs);

// Tmax <= 0 selects the per-arm mixing horizon
double whittle_lp_upper_bound(const std::vector<FeedbackArm>& arms, std::int64_t Tmax = 0);

// min over lambda of lambda + G(lambda); equals the untruncated LP value
double lagrangian_upper_bound(const std::vector<FeedbackArm>& arms);

struct PenaltyMix {
    double lambda = 0.0;
    double a = 0.0;        // weight on the lambda_minus policies
    double Q_minus = 0.0;
    double Q_plus = 0.0;
    double R_minus = 0.0;
    double R_plus = 0.0;
    double value() const { return a * R_minus + (1.0 - a) * R_plus; }
};

// penalty at which the total play rate crosses 1, with the mixing weight
PenaltyMix whittle_lp_penalty(const std::vector<FeedbackArm>& arms);

}  // namespace rb
