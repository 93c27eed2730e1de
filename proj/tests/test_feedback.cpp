#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "rb/feedback.hpp"
#include "chain_oracle.hpp"

using namespace rb;

TEST_CASE("R and Q closed forms") {
    FeedbackArm a(0.1, 0.1, 2.0);
    CHECK(policy_reward_R(a, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(policy_playrate_Q(a, 1) == 1.0);
    FeedbackArm b(0.2, 0.3, 1.0);
    auto [R, Q] = test::chain_RQ(b, 4);
    CHECK(std::abs(policy_reward_R(b, 4) - R) <= 1e-12);
    CHECK(std::abs(policy_playrate_Q(b, 4) - Q) <= 1e-12);
    double sig = b.stationary();
    std::int64_t big = 1000000;
    CHECK(policy_reward_R(b, big) == doctest::Approx(b.r * sig / (sig + big * b.beta)).epsilon(1e-12));
}

TEST_CASE("closed forms match chain solve for t <= 200") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.01, 0.49);
    for (int trial = 0; trial < 20; ++trial) {
        FeedbackArm a(U(rng), U(rng), 0.5 + U(rng));
        for (int t = 1; t <= 200; t += (t < 20 ? 1 : 13)) {
            auto [R, Q] = test::chain_RQ(a, t);
            CHECK(std::abs(policy_reward_R(a, t) - R) <= 1e-12);
            CHECK(std::abs(policy_playrate_Q(a, t) - Q) <= 1e-12);
        }
        for (int t = 1; t <= 1000; ++t) CHECK(policy_playrate_Q(a, t) >= 1.0 / t - 1e-15);
    }
}

TEST_CASE("F identities") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.01, 0.49);
    for (int trial = 0; trial < 200; ++trial) {
        FeedbackArm a(U(rng), U(rng), 2.0 * U(rng) + 0.1);
        std::int64_t t = 1 + static_cast<std::int64_t>(rng() % 500);
        double lam = U(rng) * a.r;
        CHECK(lagrange_value_F(a, 0.0, t) == doctest::Approx(policy_reward_R(a, t)).epsilon(1e-14));
        CHECK(std::abs(lagrange_value_F(a, lam, t) - (policy_reward_R(a, t) - lam * policy_playrate_Q(a, t))) <= 1e-14);
        CHECK(lagrange_value_F(a, a.r, t) < 0.0);
    }
}

namespace {

SingleArmOpt brute(const FeedbackArm& a, double lam, std::int64_t T) {
    SingleArmOpt best{0.0, kNever};
    for (std::int64_t t = 1; t <= T; ++t) {
        double f = lagrange_value_F(a, lam, t);
        if (f > best.H) best = {f, t};
    }
    return best;
}

}  // namespace

TEST_CASE("single arm optimum") {
    FeedbackArm a(0.1, 0.1, 2.0);
    SingleArmOpt o = single_arm_optimum(a, never_play_threshold(a));
    CHECK(o.t == kNever);
    CHECK(o.H == 0.0);
    o = single_arm_optimum(a, 0.0);
    CHECK(o.t == 1);
    CHECK(o.H == doctest::Approx(policy_reward_R(a, 1)));
    SingleArmOpt bz = brute(a, 0.0, 10000);
    CHECK(bz.t == 1);

    FeedbackArm c(0.01, 0.01, 1.0);
    o = single_arm_optimum(c, 0.3);
    SingleArmOpt bc = brute(c, 0.3, 100000);
    CHECK(o.t == bc.t);
    CHECK(std::abs(o.H - bc.H) <= 1e-10);
}

TEST_CASE("single arm optimum agrees with scan on random arms") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        FeedbackArm a(0.005 + 0.3 * U(rng), 0.005 + 0.3 * U(rng), 0.2 + U(rng));
        double lam = U(rng) * never_play_threshold(a) * 1.05;
        SingleArmOpt o = single_arm_optimum(a, lam);
        SingleArmOpt b = brute(a, lam, 20000);
        CHECK(std::abs(o.H - b.H) <= 1e-12);
        if (b.H > 1e-9) CHECK(o.t == b.t);
    }
}

TEST_CASE("H non-increasing and convex, t non-decreasing") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.01, 0.45);
    for (int trial = 0; trial < 50; ++trial) {
        FeedbackArm a(U(rng), U(rng), 0.5 + U(rng));
        double thr = never_play_threshold(a);
        const int N = 200;
        std::vector<double> H(N + 1);
        std::vector<std::int64_t> T(N + 1);
        for (int k = 0; k <= N; ++k) {
            auto o = single_arm_optimum(a, thr * 1.1 * k / N);
            H[k] = o.H;
            T[k] = o.t;
        }
        for (int k = 0; k < N; ++k) {
            CHECK(H[k + 1] <= H[k] + 1e-15);
            CHECK(T[k + 1] >= T[k]);
        }
        for (int k = 1; k < N; ++k) CHECK(H[k + 1] - 2 * H[k] + H[k - 1] >= -1e-12);
    }
}

TEST_CASE("balanced lambda") {
    std::vector<FeedbackArm> one{FeedbackArm(0.1, 0.1, 2.0)};
    FeedbackPolicyParams p = balanced_lambda(one, 1e-3);
    CHECK(p.lambda_star >= p.lambda_lower);
    CHECK(p.lambda_star <= p.lambda_upper);
    CHECK(p.lambda_star < p.G);
    CHECK(p.G - p.lambda_star <= 1e-9);

    // independent bisection on lambda - G(lambda)
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid < G_of_lambda(one, mid)) lo = mid; else hi = mid;
    }
    CHECK(std::abs(lo - p.lambda_star) <= 1e-9);

    std::vector<FeedbackArm> two{FeedbackArm(0.1, 0.1, 2.0), FeedbackArm(0.1, 0.1, 2.0)};
    FeedbackPolicyParams q = balanced_lambda(two, 1e-3);
    CHECK(q.lambda_star >= p.lambda_star);

    std::vector<FeedbackArm> zero{FeedbackArm(0.1, 0.1, 0.0), FeedbackArm(0.2, 0.1, 0.0)};
    try {
        balanced_lambda(zero, 1e-3);
        FAIL("expected AllArmsInactive");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AllArmsInactive);
    }
}

TEST_CASE("dual identities at the balanced lambda") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + static_cast<int>(rng() % 6);
        std::vector<FeedbackArm> arms;
        for (int i = 0; i < n; ++i) arms.emplace_back(0.02 + 0.3 * U(rng), 0.02 + 0.3 * U(rng), 0.1 + U(rng));
        FeedbackPolicyParams p = balanced_lambda(arms, 1e-3);
        for (int i = 0; i < n; ++i) {
            const auto& ap = p.arms[i];
            if (!ap.active) continue;
            CHECK(ap.p >= 0.0);
            double v = belief_v(arms[i], ap.t);
            CHECK(std::abs(p.lambda_star + ap.t * ap.h - v * ap.p) <= 1e-6);
            CHECK(std::abs(p.lambda_star + ap.h - arms[i].r + arms[i].beta * ap.p) <= 1e-6);
        }
    }
}

TEST_CASE("balanced index priorities") {
    FeedbackPolicyParams p;
    p.arms = {{0.1, 3, 1.0, true}, {0.1, 2, 1.0, true}, {0.0, kNever, 0.0, false}};
    using B = BeliefState;
    CHECK(balanced_index_next(p, {B{Obs::b, 1}, B{Obs::g, 1}, B{Obs::g, 1}}) == 1);
    CHECK(balanced_index_next(p, {B{Obs::b, 2}, B{Obs::b, 1}, B{Obs::g, 1}}) == -1);
    CHECK(balanced_index_next(p, {B{Obs::b, 5}, B{Obs::g, 1}, B{Obs::b, 1}}) == 1);
    CHECK(balanced_index_next(p, {B{Obs::b, 4}, B{Obs::b, 4}, B{Obs::b, 9}}) == 1);
    CHECK(balanced_index_next(p, {B{Obs::b, 5}, B{Obs::b, 4}, B{Obs::b, 9}}) == 0);
}

TEST_CASE("whittle LP bounds") {
    std::vector<FeedbackArm> one{FeedbackArm(0.1, 0.1, 2.0)};
    double lp = whittle_lp_upper_bound(one);
    double best = 0.0;
    for (int t = 1; t <= 2000; ++t)
        if (policy_playrate_Q(one[0], t) <= 1.0 + 1e-15) best = std::max(best, policy_reward_R(one[0], t));
    CHECK(lp >= best - 1e-9);
    CHECK(lp == doctest::Approx(1.0).epsilon(1e-8));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        std::vector<FeedbackArm> arms;
        for (int i = 0; i < n; ++i) arms.emplace_back(0.05 + 0.3 * U(rng), 0.05 + 0.3 * U(rng), 0.1 + U(rng));
        double v = whittle_lp_upper_bound(arms);
        double lag = lagrangian_upper_bound(arms);
        CHECK(std::abs(v - lag) <= 1e-7 * (1.0 + v));
        PenaltyMix mix = whittle_lp_penalty(arms);
        CHECK(mix.a * mix.Q_minus + (1.0 - mix.a) * mix.Q_plus == doctest::Approx(1.0));
        CHECK(mix.value() == doctest::Approx(v).epsilon(1e-6));
        for (double l : {0.0, 0.1, 0.3, 0.7}) CHECK(l + G_of_lambda(arms, l) >= v - 1e-9);
    }
}

TEST_CASE("identical arms aggregate without changing the value") {
    std::vector<FeedbackArm> arms{FeedbackArm(0.05, 0.1, 1.0), FeedbackArm(0.05, 0.1, 1.0), FeedbackArm(0.05, 0.1, 1.0)};
    double agg = whittle_lp_upper_bound(arms);
    std::vector<FeedbackArm> perturbed = arms;
    perturbed[1] = FeedbackArm(0.05, 0.1, 1.0 + 1e-13);
    perturbed[2] = FeedbackArm(0.05, 0.1, 1.0 - 1e-13);
    double sep = whittle_lp_upper_bound(perturbed);
    CHECK(std::abs(agg - sep) <= 1e-9);
}
