#include "rb/gallery.hpp"

#include <cmath>

namespace rb {

namespace {

void range(bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorKind::ParameterOutOfRange, msg);
}

}  // namespace

FeedbackArm deterministic_arm(double r, double delta, double beta0) {
    double a = 1.0 - delta - beta0;
    while (a + beta0 > 1.0 - delta) a = std::nextafter(a, 0.0);
    return FeedbackArm(a, beta0, r, delta);
}

FeedbackInstance myopic_gap(int n) {
    range(n >= 2 && n <= 40, "myopic-gap needs 2 <= n <= 40");
    FeedbackInstance inst;
    // r scaled so the next-step reward r(1 - beta0) of the encoded arm is exactly 1, like the literal arm;
    // at r = 1 a type-2 arm left alone long enough would outbid it by less than beta0
    const double beta0 = 1e-9;
    inst.arms.push_back(deterministic_arm(1.0 / (1.0 - beta0), kDefaultDelta, beta0));
    double beta = std::ldexp(1.0, -n);
    double alpha = beta / (n - 1);
    for (int i = 0; i < n; ++i) inst.arms.emplace_back(alpha, beta, static_cast<double>(n));
    return inst;
}

FeedbackInstance index_gap() {
    FeedbackInstance inst;
    inst.arms.push_back(deterministic_arm());
    inst.arms.emplace_back(0.1, 0.1, 2.0);
    inst.arms.emplace_back(0.1, 0.1, 2.0);
    return inst;
}

LpGap lp_gap(int n, double beta) {
    range(n >= 2 && n <= 100000, "lp-gap needs 2 <= n <= 1e5");
    range(beta > 0.0 && beta * n / (n - 1) < 1.0 - kDefaultDelta, "lp-gap needs 0 < beta and alpha + beta < 1");
    LpGap g;
    double alpha = beta / (n - 1);
    for (int i = 0; i < n; ++i) g.instance.arms.emplace_back(alpha, beta, 1.0);
    g.complete_info_bound = 1.0 - std::pow(1.0 - 1.0 / n, n);
    return g;
}

nlohmann::json nonseparable_gap(int n) {
    range(n >= 2 && n <= 100000, "nonseparable-gap needs 2 <= n <= 1e5");
    using nlohmann::json;
    // q_kj(t) given as [t, value] breakpoints; states g=0, b=1, a=2 (absorbing)
    json arm = {
        {"states", json::array({
            {{"name", "g"}, {"reward", 1.0}},
            {{"name", "b"}, {"reward", 0.0}},
            {{"name", "a"}, {"reward", 0.0}},
        })},
        {"q_breakpoints", {
            {"g->b", json::array({json::array({1, 0.5})})},
            {"g->a", json::array({json::array({1, 0.0}), json::array({2, 0.5})})},
            {"b->g", json::array({json::array({1, 0.0}), json::array({2 * n - 2, 0.0}), json::array({2 * n - 1, 0.5})})},
            {"b->a", json::array({json::array({1, 0.0}), json::array({2 * n - 1, 0.0}), json::array({2 * n, 0.5})})},
            {"a->g", json::array({json::array({1, 0.0})})},
            {"a->b", json::array({json::array({1, 0.0})})},
        }},
    };
    json arms = json::array();
    for (int i = 0; i < n; ++i) arms.push_back(arm);
    return {{"type", "nonseparable"}, {"n", n}, {"M", 1}, {"arms", arms},
            {"note", "transition probabilities are not of the form f_k(t) q(k,j); LP relaxation gap grows linearly in n"}};
}

ReplenishInstance replenish_gap(int n) {
    range(n >= 2 && n <= 1000, "replenish-gap needs 2 <= n <= 1000");
    ReplenishInstance inst;
    inst.M = 1;
    double nn = static_cast<double>(n);
    auto machine = [](double s, double p) {
        Machine m;
        m.reward = {1.0, 0.0};
        m.repair_cost = {0.0, 0.0};
        m.p = {{1.0 - p, p}, {0.0, 1.0}};
        m.s = s;
        m.rho = 0;
        return m;
    };
    inst.machines.push_back(machine(1.0 / (nn * nn * nn * nn), 1.0 / nn));
    inst.machines.push_back(machine(1.0, 1.0));
    return inst;
}

}  // namespace rb
