#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "rb/feedback.hpp"
#include "rb/gallery.hpp"
#include "rb/sim.hpp"
#include "rb/whittle.hpp"

using namespace rb;

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(7, 0), b(7, 0), c(7, 1);
    for (int k = 0; k < 100; ++k) {
        double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    Rng d(7, 0);
    int same = 0;
    for (int k = 0; k < 100; ++k) same += d.uniform() == c.uniform();
    CHECK(same == 0);
}

TEST_CASE("always play a single arm: closed form R(1)") {
    FeedbackInstance inst;
    inst.arms.emplace_back(0.1, 0.1, 2.0);
    SimConfig cfg;
    cfg.horizon = 1000000;
    cfg.burnin = 1000;
    cfg.reps = 4;
    SimResult r = simulate(inst, make_always_play_policy(0), cfg);
    CHECK(std::abs(r.mean - 1.0) <= 3.0 * r.stderr_ + 1e-3);
    CHECK(r.play_rate[0] == doctest::Approx(1.0));
    CHECK(r.crediting == "last-observed");
}

TEST_CASE("simulation is bit-reproducible") {
    FeedbackInstance inst = index_gap();
    FeedbackPolicyParams p = balanced_lambda(inst.arms, 1e-3);
    SimConfig cfg;
    cfg.horizon = 20000;
    cfg.reps = 3;
    cfg.seed = 7;
    SimResult a = simulate(inst, make_balanced_policy(p), cfg);
    SimResult b = simulate(inst, make_balanced_policy(p), cfg);
    CHECK(a.rep_means == b.rep_means);
    CHECK(a.mean == b.mean);
}

TEST_CASE("exact evaluation of P(t) equals R(t)") {
    FeedbackInstance inst;
    inst.arms.emplace_back(0.2, 0.3, 1.0);
    for (int t : {1, 2, 4, 9}) {
        double v = exact_policy_eval(inst, make_fixed_wait_policy(t));
        CHECK(std::abs(v - policy_reward_R(inst.arms[0], t)) <= 1e-10);
    }
}

TEST_CASE("simulation agrees with exact evaluation") {
    FeedbackInstance inst;
    inst.arms.emplace_back(0.15, 0.1, 1.0);
    inst.arms.emplace_back(0.2, 0.25, 1.5);
    FeedbackPolicyParams p = balanced_lambda(inst.arms, 1e-3);
    FeedbackPolicy pol = make_balanced_policy(p);
    double ex = exact_policy_eval(inst, pol);
    SimConfig cfg;
    cfg.horizon = 200000;
    cfg.reps = 8;
    cfg.seed = 3;
    SimResult r = simulate(inst, pol, cfg);
    CHECK(std::abs(r.mean - ex) <= 4.0 * r.stderr_);

    WhittleIndexTable tab(inst.arms);
    double ls = p.lambda_star;
    FeedbackPolicy tw = [&tab, ls](const std::vector<BeliefState>& b) { return threshold_whittle_next(ls, tab, b); };
    double ex2 = exact_policy_eval(inst, tw);
    SimResult r2 = simulate(inst, tw, cfg);
    CHECK(std::abs(r2.mean - ex2) <= 4.0 * r2.stderr_);
}

TEST_CASE("single-arm value iteration picks the best fixed wait") {
    FeedbackInstance inst;
    inst.arms.emplace_back(0.2, 0.3, 1.0);
    ViResult v = vi_optimal(inst, 0.99, 100);
    // one arm and no idling: playing every step is optimal
    CHECK(v.average_reward == doctest::Approx(policy_reward_R(inst.arms[0], 1)).epsilon(1e-9));
}

TEST_CASE("feedback drift certificate on small instances") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 15; ++trial) {
        FeedbackInstance inst;
        int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) inst.arms.emplace_back(0.05 + 0.3 * U(rng), 0.05 + 0.3 * U(rng), 0.2 + U(rng));
        FeedbackPolicyParams p = balanced_lambda(inst.arms, 1e-3);
        DriftReport d = feedback_lyapunov_check(inst, p);
        CHECK(d.states > 0);
        CHECK(d.min_drift >= d.bound - 1e-9);
    }
}

TEST_CASE("gallery shapes") {
    FeedbackInstance ig = index_gap();
    REQUIRE(ig.arms.size() == 3);
    CHECK(ig.arms[1].alpha == 0.1);
    CHECK(ig.arms[2].r == 2.0);
    CHECK(ig.arms[0].alpha + ig.arms[0].beta <= 1.0 - kDefaultDelta);
    LpGap lg = lp_gap(50, 1e-5);
    CHECK(lg.instance.arms.size() == 50);
    CHECK(lg.instance.arms[7].alpha == doctest::Approx(1e-5 / 49));
    CHECK(lg.complete_info_bound == doctest::Approx(1.0 - std::pow(0.98, 50)));
    ReplenishInstance rg = replenish_gap(10);
    CHECK(rg.machines[0].s == doctest::Approx(1e-4));
    CHECK(rg.machines[0].p[0][1] == doctest::Approx(0.1));
    CHECK(rg.machines[1].p[0][1] == 1.0);
    CHECK_NOTHROW(rg.validate());
    CHECK_THROWS_AS(myopic_gap(41), Error);
    CHECK(myopic_gap(12).arms.size() == 13);
    CHECK(nonseparable_gap(5)["arms"].size() == 5);
}
