#include "rb/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "rb/lp.hpp"

namespace rb {

double policy_reward_R(const FeedbackArm& arm, std::int64_t t) {
    if (t == kNever) return 0.0;
    double v = belief_v(arm, t);
    return arm.r * v / (v + static_cast<double>(t) * arm.beta);
}

double policy_playrate_Q(const FeedbackArm& arm, std::int64_t t) {
    if (t == kNever) return 0.0;
    if (t == 1) return 1.0;
    double v = belief_v(arm, t);
    return (v + arm.beta) / (v + static_cast<double>(t) * arm.beta);
}

double lagrange_value_F(const FeedbackArm& arm, double lambda, std::int64_t t) {
    if (t == kNever) return 0.0;
    double v = belief_v(arm, t);
    return ((arm.r - lambda) * v - lambda * arm.beta) / (v + static_cast<double>(t) * arm.beta);
}

double never_play_threshold(const FeedbackArm& arm) {
    double s = arm.alpha + arm.beta;
    return arm.r * arm.alpha / (arm.alpha + arm.beta * s);
}

SingleArmOpt single_arm_optimum(const FeedbackArm& arm, double lambda) {
    if (lambda >= never_play_threshold(arm)) return {0.0, kNever};
    const double a = arm.alpha, b = arm.beta, r = arm.r;
    const double sig = a / (a + b);
    const double nu = 1.0 - a - b;
    const double lninv = -std::log1p(-(a + b));  // ln(1/nu)
    const double eta = sig * lninv;
    const double phi = eta * lambda + sig * (r - lambda);
    const double mu = eta * (r - lambda);
    const double omega = lambda * b - a * (r - lambda) / (a + b);
    if (mu == 0.0) throw Error(ErrorKind::DegenerateArm, "mu = 0 in single-arm optimizer");
    (void)nu;

    auto g = [&](double t) { return (phi + mu * t) * std::exp(-lninv * t) + omega; };

    std::vector<std::int64_t> cand{1};
    double t3 = std::max(1.0, 1.0 / lninv - phi / mu);
    if (g(t3) >= 0.0) {
        if (t3 < 9e18) {
            cand.push_back(static_cast<std::int64_t>(std::floor(t3)));
            cand.push_back(static_cast<std::int64_t>(std::ceil(t3)));
        }
        // smallest integer T >= ceil(t3) with g(T) < 0; the real root lies in (T-1, T)
        std::int64_t lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(t3)));
        std::int64_t hi = lo;
        const std::int64_t cap = std::int64_t(1) << 62;
        while (g(static_cast<double>(hi)) >= 0.0) {
            if (hi >= cap) throw Error(ErrorKind::NumericFailure, "no sign change below 2^62");
            lo = hi;
            hi = std::min(cap, hi * 2);
        }
        while (hi - lo > 1) {
            std::int64_t mid = lo + (hi - lo) / 2;
            if (g(static_cast<double>(mid)) >= 0.0) lo = mid; else hi = mid;
        }
        cand.push_back(std::max<std::int64_t>(1, hi - 1));
        cand.push_back(hi);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    SingleArmOpt best{lagrange_value_F(arm, lambda, cand[0]), cand[0]};
    for (std::size_t k = 1; k < cand.size(); ++k) {
        double f = lagrange_value_F(arm, lambda, cand[k]);
        if (f > best.H) best = {f, cand[k]};
    }
    if (best.H <= 0.0) return {0.0, kNever};
    return best;
}

double G_of_lambda(const std::vector<FeedbackArm>& arms, double lambda) {
    double s = 0.0;
    for (const auto& a : arms) s += single_arm_optimum(a, lambda).H;
    return s;
}

FeedbackPolicyParams params_at_lambda(const std::vector<FeedbackArm>& arms, double lambda) {
    FeedbackPolicyParams out;
    out.lambda_star = out.lambda_lower = out.lambda_upper = lambda;
    out.arms.resize(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i) {
        SingleArmOpt o = single_arm_optimum(arms[i], lambda);
        FeedbackArmParams& ap = out.arms[i];
        ap.h = o.H;
        ap.t = o.t;
        ap.active = o.H > 0.0;
        if (ap.active) ap.p = (arms[i].r - lambda - o.H) / arms[i].beta;
        out.G += o.H;
    }
    return out;
}

FeedbackPolicyParams balanced_lambda(const std::vector<FeedbackArm>& arms, double eps, bool refine) {
    if (arms.empty()) throw Error(ErrorKind::InvalidInput, "no arms");
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::ParameterOutOfRange, "eps must be in (0,1)");
    double lambda = 0.0;
    for (const auto& a : arms) lambda += a.r;
    if (lambda <= 0.0) throw Error(ErrorKind::AllArmsInactive, "all rewards are zero");
    while (!(lambda < G_of_lambda(arms, lambda))) {
        lambda /= (1.0 + eps);
        if (lambda < 1e-300) throw Error(ErrorKind::AllArmsInactive, "G(lambda) = 0 near lambda = 0");
    }
    double lo = lambda, hi = lambda * (1.0 + eps);
    if (refine) {
        for (int it = 0; it < 50; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid < G_of_lambda(arms, mid)) lo = mid; else hi = mid;
        }
    }
    FeedbackPolicyParams out = params_at_lambda(arms, lo);
    out.lambda_lower = lambda;
    out.lambda_upper = lambda * (1.0 + eps);
    out.eps = eps;
    return out;
}

int balanced_index_next(const FeedbackPolicyParams& params, const std::vector<BeliefState>& beliefs) {
    const std::size_t n = beliefs.size();
    for (std::size_t i = 0; i < n; ++i)
        if (params.arms[i].active && beliefs[i].last == Obs::g && beliefs[i].t == 1) return static_cast<int>(i);
    // a g observation left unplayed (only possible at start-up) is treated as ready
    for (std::size_t i = 0; i < n; ++i)
        if (params.arms[i].active && beliefs[i].last == Obs::g) return static_cast<int>(i);
    int best = -1;
    std::int64_t best_slack = -1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ap = params.arms[i];
        if (!ap.active || beliefs[i].t < ap.t) continue;
        std::int64_t slack = beliefs[i].t - ap.t;
        if (slack > best_slack) {
            best_slack = slack;
            best = static_cast<int>(i);
        }
    }
    return best;
}

double whittle_lp_upper_bound(const std::vector<FeedbackArm>& arms, std::int64_t Tmax) {
    // identical arms share one block with rate budget k; symmetric optima make this exact
    std::map<std::tuple<double, double, double>, int> groups;
    std::vector<std::pair<FeedbackArm, int>> blocks;
    for (const auto& a : arms) {
        auto key = std::make_tuple(a.alpha, a.beta, a.r);
        auto it = groups.find(key);
        if (it == groups.end()) {
            groups.emplace(key, static_cast<int>(blocks.size()));
            blocks.push_back({a, 1});
        } else {
            ++blocks[it->second].second;
        }
    }
    LpModel lp;
    lp.sense = Sense::Max;
    std::vector<std::pair<int, double>> total;
    for (const auto& [arm, k] : blocks) {
        std::int64_t T = Tmax > 0 ? Tmax : mixing_horizon(arm);
        std::vector<std::pair<int, double>> rate, flow;
        for (std::int64_t t = 1; t <= T; ++t) {
            int xg = lp.add_var(arm.r);
            int xb = lp.add_var(0.0);
            double td = static_cast<double>(t);
            total.push_back({xg, 1.0});
            total.push_back({xb, 1.0});
            rate.push_back({xg, td});
            rate.push_back({xb, td});
            flow.push_back({xb, belief_v(arm, t)});
            flow.push_back({xg, -(1.0 - belief_u(arm, t))});
        }
        lp.add_row(std::move(rate), Rel::Le, static_cast<double>(k));
        lp.add_row(std::move(flow), Rel::Eq, 0.0);
    }
    lp.add_row(std::move(total), Rel::Le, 1.0);
    LpSolution s = lp_solve(lp);
    require_optimal(s, "whittle LP");
    return s.objective;
}

double lagrangian_upper_bound(const std::vector<FeedbackArm>& arms) {
    // lambda + G(lambda) is convex; golden-section search over [0, sum r]
    double lo = 0.0, hi = 0.0;
    for (const auto& a : arms) hi += a.r;
    auto f = [&](double l) { return l + G_of_lambda(arms, l); };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        if (f1 <= f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo); f1 = f(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo); f2 = f(x2);
        }
    }
    return std::min({f1, f2, f(0.5 * (lo + hi))});
}

PenaltyMix whittle_lp_penalty(const std::vector<FeedbackArm>& arms) {
    auto totals = [&](double l, double& Q, double& R) {
        Q = R = 0.0;
        for (const auto& a : arms) {
            std::int64_t t = single_arm_optimum(a, l).t;
            Q += policy_playrate_Q(a, t);
            R += policy_reward_R(a, t);
        }
    };
    PenaltyMix out;
    double Q0, R0;
    totals(0.0, Q0, R0);
    if (Q0 <= 1.0) {
        out.a = 1.0;
        out.Q_minus = out.Q_plus = Q0;
        out.R_minus = out.R_plus = R0;
        return out;
    }
    double lo = 0.0, hi = 0.0;
    for (const auto& a : arms) hi = std::max(hi, never_play_threshold(a));
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double Q, R;
        totals(mid, Q, R);
        if (Q >= 1.0) lo = mid; else hi = mid;
    }
    out.lambda = lo;
    totals(lo, out.Q_minus, out.R_minus);
    totals(hi, out.Q_plus, out.R_plus);
    double d = out.Q_minus - out.Q_plus;
    out.a = d > 0.0 ? (1.0 - out.Q_plus) / d : 1.0;
    return out;
}

}  // namespace rb
