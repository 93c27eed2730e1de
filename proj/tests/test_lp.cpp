#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "rb/core.hpp"
#include "rb/lp.hpp"

using namespace rb;

TEST_CASE("single variable max") {
    LpModel m;
    m.sense = Sense::Max;
    int x = m.add_var(1.0);
    m.add_row({{x, 1.0}}, Rel::Le, 3.0);
    LpSolution s = lp_solve(m);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(3.0));
    CHECK(s.dual[0] == doctest::Approx(1.0));
    CsReport cs = check_complementary_slackness(m, s);
    CHECK(cs.max() == 0.0);
}

TEST_CASE("symmetric balance toy") {
    LpModel m;
    int l = m.add_var(1.0), h = m.add_var(1.0);
    m.add_row({{l, 1.0}, {h, 1.0}}, Rel::Ge, 5.0);
    m.add_row({{l, 1.0}, {h, -1.0}}, Rel::Eq, 0.0);
    LpSolution s = lp_solve(m);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[l] == doctest::Approx(2.5));
    CHECK(s.x[h] == doctest::Approx(2.5));
    CHECK(s.objective == doctest::Approx(5.0));
}

TEST_CASE("infeasible and unbounded") {
    LpModel m;
    int x = m.add_var(1.0);
    m.add_row({{x, 1.0}}, Rel::Le, 1.0);
    m.add_row({{x, 1.0}}, Rel::Ge, 2.0);
    CHECK(lp_solve(m).status == LpStatus::Infeasible);
    CHECK_THROWS_AS(require_optimal(lp_solve(m), "toy"), Error);

    LpModel u;
    u.sense = Sense::Max;
    int y = u.add_var(1.0);
    int z = u.add_var(0.0);
    u.add_row({{y, 1.0}, {z, -1.0}}, Rel::Le, 1.0);
    CHECK(lp_solve(u).status == LpStatus::Unbounded);
}

TEST_CASE("free, shifted and bounded variables") {
    // min x + y, x free, y in [2, 5], x + y >= 1, x - y >= -10
    LpModel m;
    int x = m.add_var(1.0, -kInf, kInf);
    int y = m.add_var(1.0, 2.0, 5.0);
    m.add_row({{x, 1.0}, {y, 1.0}}, Rel::Ge, 1.0);
    m.add_row({{x, 1.0}, {y, -1.0}}, Rel::Ge, -10.0);
    LpSolution s = lp_solve(m);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(1.0));
    CHECK(s.primal_residual <= 1e-9);
    CHECK(s.dual_residual <= 1e-9);
    CHECK(std::abs(s.objective - s.dual_objective) <= 1e-9);

    // max 3x - y with x <= 4 (upper bound only)
    LpModel n;
    n.sense = Sense::Max;
    int a = n.add_var(3.0, -kInf, 4.0);
    int b = n.add_var(-1.0);
    n.add_row({{a, 1.0}, {b, -1.0}}, Rel::Le, 2.0);
    LpSolution t = lp_solve(n);
    REQUIRE(t.status == LpStatus::Optimal);
    CHECK(t.objective == doctest::Approx(10.0));
    CHECK(t.x[a] == doctest::Approx(4.0));
    CHECK(t.x[b] == doctest::Approx(2.0));
}

TEST_CASE("degenerate cycling example terminates") {
    // Beale's classic cycling LP
    LpModel m;
    m.sense = Sense::Min;
    int x1 = m.add_var(-0.75), x2 = m.add_var(150.0), x3 = m.add_var(-0.02), x4 = m.add_var(6.0);
    m.add_row({{x1, 0.25}, {x2, -60.0}, {x3, -0.04}, {x4, 9.0}}, Rel::Le, 0.0);
    m.add_row({{x1, 0.5}, {x2, -90.0}, {x3, -0.02}, {x4, 3.0}}, Rel::Le, 0.0);
    m.add_row({{x3, 1.0}}, Rel::Le, 1.0);
    LpSolution s = lp_solve(m);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-0.05));
}

namespace {

// random feasible bounded LP: max c x, A x <= b with A >= 0 rows plus mixed rows
LpModel random_lp(std::mt19937_64& rng, int n, int m) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    LpModel lp;
    lp.sense = (rng() % 2) ? Sense::Max : Sense::Min;
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
        x0[j] = U(rng);
        lp.add_var(lp.sense == Sense::Max ? U(rng) : -U(rng) + 0.3);
    }
    for (int i = 0; i < m; ++i) {
        std::vector<std::pair<int, double>> coef;
        double act = 0.0;
        for (int j = 0; j < n; ++j) {
            double a = U(rng) * 2.0 - 0.5;
            if (U(rng) < 0.3) a = 0.0;
            coef.push_back({j, a});
            act += a * x0[j];
        }
        int kind = static_cast<int>(rng() % 5);
        if (kind <= 2) lp.add_row(coef, Rel::Le, act + U(rng));
        else if (kind == 3) lp.add_row(coef, Rel::Ge, act - U(rng));
        else lp.add_row(coef, Rel::Eq, act);
    }
    // box keeps it bounded
    std::vector<std::pair<int, double>> all;
    for (int j = 0; j < n; ++j) all.push_back({j, 1.0});
    lp.add_row(all, Rel::Le, static_cast<double>(n));
    return lp;
}

}  // namespace

TEST_CASE("random 10x10 LPs: strong duality and slackness") {
    std::mt19937_64 rng(2024);
    int solved = 0;
    for (int trial = 0; trial < 300; ++trial) {
        LpModel lp = random_lp(rng, 10, 10);
        LpSolution s = lp_solve(lp);
        REQUIRE(s.status == LpStatus::Optimal);
        ++solved;
        CHECK(s.primal_residual <= 1e-9);
        CHECK(s.dual_residual <= 1e-9);
        CHECK(std::abs(s.objective - s.dual_objective) <= 1e-9 * (1.0 + std::abs(s.objective)));
        CsReport cs = check_complementary_slackness(lp, s);
        CHECK(cs.max() <= 1e-8);
    }
    CHECK(solved == 300);
}

TEST_CASE("solving through the dual gives the same optimum and certificates") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        LpModel lp = random_lp(rng, 8, 12);
        // mix in free and bounded columns
        lp.lb[0] = -kInf;
        lp.ub[1] = 5.0;
        lp.lb[2] = lp.ub[2] = 0.25;
        LpSolution a = lp_solve(lp);
        LpSolution b = lp_solve_dual(lp);
        REQUIRE(a.status == b.status);
        if (a.status != LpStatus::Optimal) continue;
        CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-9));
        CHECK(b.primal_residual <= 1e-9);
        CHECK(b.dual_residual <= 1e-9);
        CHECK(check_complementary_slackness(lp, b).max() <= 1e-8);
    }
}

TEST_CASE("determinism") {
    std::mt19937_64 rng(9);
    LpModel lp = random_lp(rng, 10, 10);
    LpSolution a = lp_solve(lp), b = lp_solve(lp);
    CHECK(a.x == b.x);
    CHECK(a.dual == b.dual);
    CHECK(a.objective == b.objective);
}

TEST_CASE("dual values agree with finite differences of the rhs") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        LpModel lp = random_lp(rng, 6, 6);
        LpSolution s = lp_solve(lp);
        REQUIRE(s.status == LpStatus::Optimal);
        for (int i = 0; i < lp.num_rows(); ++i) {
            LpModel p = lp;
            double h = 1e-6;
            p.rows[i].rhs += h;
            LpSolution sp = lp_solve(p);
            if (sp.status != LpStatus::Optimal) continue;
            LpModel q = lp;
            q.rows[i].rhs -= h;
            LpSolution sq = lp_solve(q);
            if (sq.status != LpStatus::Optimal) continue;
            double right = (sp.objective - s.objective) / h, left = (s.objective - sq.objective) / h;
            // at a nondegenerate vertex both one-sided slopes equal the dual
            if (std::abs(right - left) < 1e-4) CHECK(s.dual[i] == doctest::Approx(right).epsilon(1e-4).scale(1.0));
        }
    }
}

TEST_CASE("cplex lp dump") {
    LpModel m;
    m.sense = Sense::Max;
    int x = m.add_var(2.0, 0.0, kInf, "x");
    int y = m.add_var(1.0, -kInf, kInf, "y");
    m.add_row({{x, 1.0}, {y, 1.0}}, Rel::Le, 3.0, "cap");
    m.add_row({{y, 1.0}}, Rel::Ge, -1.0);
    std::ostringstream os;
    write_cplex_lp(m, os);
    std::string s = os.str();
    CHECK(s.find("Maximize") != std::string::npos);
    CHECK(s.find("cap:") != std::string::npos);
    CHECK(s.find("y free") != std::string::npos);
}
