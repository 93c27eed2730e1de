#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "rb/core.hpp"

using namespace rb;

namespace {

// g-probability after t steps of the 2-state chain started in `from`
double matrix_power_oracle(double a, double b, int t, bool from_g) {
    double pg = from_g ? 1.0 : 0.0;
    for (int k = 0; k < t; ++k) pg = pg * (1.0 - b) + (1.0 - pg) * a;
    return pg;
}

}  // namespace

TEST_CASE("belief_v basic values") {
    FeedbackArm arm(0.2, 0.3, 1.0);
    CHECK(belief_v(arm, 1) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(std::abs(belief_v(arm, 1000) - 0.4) <= 1e-12);
    FeedbackArm a2(0.1, 0.1, 1.0);
    CHECK(std::abs(belief_v(a2, 3) - matrix_power_oracle(0.1, 0.1, 3, false)) <= 1e-15);
}

TEST_CASE("belief_u basic values") {
    FeedbackArm arm(0.2, 0.3, 1.0);
    CHECK(std::abs(belief_u(arm, 1) - 0.7) <= 1e-15);
    FeedbackArm a2(0.1, 0.1, 1.0);
    CHECK(std::abs(belief_u(a2, 3) - matrix_power_oracle(0.1, 0.1, 3, true)) <= 1e-15);
}

TEST_CASE("beliefs match matrix powers on random arms") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.001, 0.49);
    for (int trial = 0; trial < 200; ++trial) {
        FeedbackArm arm(U(rng), U(rng), 1.0);
        for (int t = 1; t <= 60; ++t) {
            CHECK(std::abs(belief_v(arm, t) - matrix_power_oracle(arm.alpha, arm.beta, t, false)) <= 1e-12);
            CHECK(std::abs(belief_u(arm, t) - matrix_power_oracle(arm.alpha, arm.beta, t, true)) <= 1e-12);
        }
    }
}

TEST_CASE("u - v identity, monotonicity and concavity") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.001, 0.49);
    for (int trial = 0; trial < 100; ++trial) {
        FeedbackArm arm(U(rng), U(rng), 1.0);
        for (int t = 1; t <= 300; ++t) {
            double nu_t = std::pow(arm.nu(), t);
            CHECK(std::abs(belief_u(arm, t) - belief_v(arm, t) - nu_t) <= 1e-12);
            double v0 = belief_v(arm, t), v1 = belief_v(arm, t + 1), v2 = belief_v(arm, t + 2);
            CHECK(v1 >= v0);
            CHECK(v2 - 2 * v1 + v0 <= 1e-12);
            double w0 = 1 - belief_u(arm, t), w1 = 1 - belief_u(arm, t + 1), w2 = 1 - belief_u(arm, t + 2);
            CHECK(w1 >= w0);
            CHECK(w2 - 2 * w1 + w0 <= 1e-12);
        }
    }
}

TEST_CASE("pow_nu clamps and handles large exponents") {
    CHECK(pow_nu(0.5, 0) == 1.0);
    CHECK(pow_nu(0.5, 10) == doctest::Approx(1.0 / 1024));
    CHECK(pow_nu(0.5, 5000) == 0.0);
    CHECK(pow_nu(1.0 - 1e-6, 1000000) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("arm construction rejects invalid parameters") {
    CHECK_THROWS_AS(FeedbackArm(0.6, 0.5, 1.0), Error);
    CHECK_THROWS_AS(FeedbackArm(0.0, 0.5, 1.0), Error);
    CHECK_THROWS_AS(FeedbackArm(0.1, 0.1, -1.0), Error);
    CHECK_NOTHROW(FeedbackArm(0.5, 0.5 - 2e-6, 1.0));
    CHECK_THROWS_AS(FeedbackArm(0.5, 0.5 - 2e-7, 1.0), Error);
}

TEST_CASE("pwl evaluation") {
    PiecewiseLinearMonotone f({{1, 0.0}, {5, 1.0}});
    CHECK(pwl_eval(f, 3) == doctest::Approx(0.5));
    CHECK(pwl_eval(f, 9) == 1.0);
    CHECK(pwl_eval(f, 1) == 0.0);
    CHECK(pwl_eval(f, 5) == 1.0);

    FeedbackArm arm(0.05, 0.07, 1.0);
    std::vector<std::pair<std::int64_t, double>> bp;
    for (int t = 1; t <= 50; ++t) bp.push_back({t, belief_v(arm, t)});
    PiecewiseLinearMonotone fv(bp);
    for (int t = 1; t <= 50; ++t) CHECK(fv(t) == belief_v(arm, t));

    CHECK_THROWS_AS(PiecewiseLinearMonotone({{2, 0.0}}), Error);
    CHECK_THROWS_AS(PiecewiseLinearMonotone({{1, 0.5}, {3, 0.2}}), Error);
    CHECK_THROWS_AS(PiecewiseLinearMonotone({{1, 0.5}, {1, 0.6}}), Error);
}

TEST_CASE("pwl is non-decreasing on random functions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        int nb = 1 + static_cast<int>(rng() % 8);
        std::vector<std::pair<std::int64_t, double>> bp;
        std::int64_t t = 1;
        std::vector<double> vals;
        for (int k = 0; k < nb; ++k) vals.push_back(U(rng));
        std::sort(vals.begin(), vals.end());
        for (int k = 0; k < nb; ++k) {
            bp.push_back({t, vals[k]});
            t += 1 + static_cast<std::int64_t>(rng() % 6);
        }
        PiecewiseLinearMonotone f(bp);
        for (std::int64_t s = 1; s < t + 5; ++s) CHECK(f(s + 1) >= f(s) - 1e-15);
    }
}

TEST_CASE("monotone arm validation") {
    MonotoneArm arm;
    arm.states = {{1.0, 1, PiecewiseLinearMonotone({{1, 0.5}})}, {0.0, 1, PiecewiseLinearMonotone({{1, 0.5}})}};
    arm.q = {{0.0, 1.0}, {1.0, 0.0}};
    CHECK_NOTHROW(arm.validate());
    arm.q = {{0.0, 1.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(arm.validate(), Error);
    arm.q = {{0.0, 1.2}, {1.0, 0.0}};
    CHECK_THROWS_AS(arm.validate(), Error);

    MonotoneInstance inst;
    MonotoneArm ok;
    ok.states = {{1.0, 2, PiecewiseLinearMonotone({{1, 0.5}})}, {0.0, 1, PiecewiseLinearMonotone({{1, 0.5}})}};
    ok.q = {{0.0, 1.0}, {1.0, 0.0}};
    inst.arms = {ok};
    inst.switch_in = {0.1};
    inst.switch_out = {0.0};
    try {
        inst.validate();
        FAIL("expected VariantMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::VariantMismatch);
    }
}

TEST_CASE("replenish validation") {
    ReplenishInstance inst;
    Machine m;
    m.reward = {1.0, 0.0};
    m.repair_cost = {0.0, 0.0};
    m.p = {{0.5, 0.5}, {0.0, 1.0}};
    m.s = 0.5;
    inst.machines = {m};
    CHECK_NOTHROW(inst.validate());
    inst.machines[0].p[0][0] = 0.6;
    CHECK_THROWS_AS(inst.validate(), Error);
}
