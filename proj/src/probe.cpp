#include "rb/probe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rb {

namespace {

struct Curves {
    std::vector<double> u, v;  // index t-1
};

Curves curves(const FeedbackArm& a, std::int64_t T) {
    Curves c;
    c.u.resize(T);
    c.v.resize(T);
    for (std::int64_t t = 1; t <= T; ++t) {
        c.u[t - 1] = belief_u(a, t);
        c.v[t - 1] = belief_v(a, t);
    }
    return c;
}

std::vector<std::int64_t> default_T(const ProbeInstance& inst, std::vector<std::int64_t> T) {
    T.resize(inst.arms.size(), 0);
    for (std::size_t i = 0; i < T.size(); ++i)
        if (T[i] <= 0) T[i] = mixing_horizon(inst.arms[i].arm);
    return T;
}

double G_at(const ProbeInstance& inst, const std::vector<std::int64_t>& T, double lambda,
            std::vector<ProbeArmParams>* out) {
    double g = 0.0;
    for (std::size_t i = 0; i < inst.arms.size(); ++i) {
        ProbeArmParams a = probe_arm_at_lambda(inst.arms[i], lambda, T[i]);
        g += a.h;
        if (out) (*out)[i] = std::move(a);
    }
    return g;
}

}  // namespace

ProbeLp build_probe_lp(const ProbeInstance& inst, std::vector<std::int64_t> T, bool balanced) {
    inst.validate();
    ProbeLp lp;
    lp.T = default_T(inst, std::move(T));
    LpModel& m = lp.model;
    m.sense = Sense::Max;
    const std::size_t n = inst.arms.size();
    std::vector<Curves> cv;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pa = inst.arms[i];
        cv.push_back(curves(pa.arm, lp.T[i]));
        const std::string tag = "_" + std::to_string(i) + "_";
        lp.xg.push_back(m.num_vars());
        for (std::int64_t t = 1; t <= lp.T[i]; ++t) m.add_var(pa.arm.r * cv[i].u[t - 1], 0.0, kInf, "xg" + tag + std::to_string(t));
        lp.xb.push_back(m.num_vars());
        for (std::int64_t t = 1; t <= lp.T[i]; ++t) m.add_var(pa.arm.r * cv[i].v[t - 1], 0.0, kInf, "xb" + tag + std::to_string(t));
        lp.zg.push_back(m.num_vars());
        for (std::int64_t t = 1; t <= lp.T[i]; ++t) m.add_var(-pa.cost, 0.0, kInf, "zg" + tag + std::to_string(t));
        lp.zb.push_back(m.num_vars());
        for (std::int64_t t = 1; t <= lp.T[i]; ++t) m.add_var(-pa.cost, 0.0, kInf, "zb" + tag + std::to_string(t));
    }
    if (balanced) lp.omega = m.add_var(0.0, -kInf, kInf, "omega");

    std::vector<std::pair<int, double>> budget;
    for (std::size_t i = 0; i < n; ++i)
        for (std::int64_t t = 0; t < lp.T[i]; ++t) {
            budget.emplace_back(lp.xg[i] + static_cast<int>(t), 1.0);
            budget.emplace_back(lp.xb[i] + static_cast<int>(t), 1.0);
        }
    if (balanced) budget.emplace_back(lp.omega, static_cast<double>(inst.M));
    lp.budget_row = m.add_row(std::move(budget), Rel::Le, static_cast<double>(inst.M), "budget");

    for (std::size_t i = 0; i < n; ++i) {
        const int Ti = static_cast<int>(lp.T[i]);
        std::vector<std::pair<int, double>> occ, flow;
        for (int t = 0; t < Ti; ++t) {
            occ.emplace_back(lp.zg[i] + t, t + 1.0);
            occ.emplace_back(lp.zb[i] + t, t + 1.0);
            flow.emplace_back(lp.zg[i] + t, 1.0 - cv[i].u[t]);
            flow.emplace_back(lp.zb[i] + t, -cv[i].v[t]);
        }
        if (balanced) occ.emplace_back(lp.omega, -1.0);
        lp.occupancy_row.push_back(m.add_row(std::move(occ), Rel::Le, 1.0, "occ_" + std::to_string(i)));
        lp.flow_row.push_back(m.add_row(std::move(flow), Rel::Le, 0.0, "flow_" + std::to_string(i)));
        for (int base : {0, 1}) {
            int x0 = base == 0 ? lp.xg[i] : lp.xb[i];
            int z0 = base == 0 ? lp.zg[i] : lp.zb[i];
            for (int t = 0; t < Ti; ++t) {
                std::vector<std::pair<int, double>> row{{x0 + t, 1.0}};
                for (int l = t; l < Ti; ++l) row.emplace_back(z0 + l, -1.0);
                m.add_row(std::move(row), Rel::Le, 0.0);
            }
        }
    }
    return lp;
}

ProbeArmParams probe_arm_at_lambda(const ProbeArm& pa, double lambda, std::int64_t T) {
    ProbeArmParams a;
    a.T = T;
    const Curves cv = curves(pa.arm, T);
    const double r = pa.arm.r;
    a.phi_g.resize(T);
    a.phi_b.resize(T);
    // with lambda fixed, phi is forced and each arm keeps a two-row LP over z
    LpModel m;
    m.sense = Sense::Max;
    double Pg = 0.0, Pb = 0.0;
    for (std::int64_t t = 0; t < T; ++t) {
        a.phi_g[t] = std::max(0.0, r * cv.u[t] - lambda);
        Pg += a.phi_g[t];
        m.add_var(Pg - pa.cost);
    }
    for (std::int64_t t = 0; t < T; ++t) {
        a.phi_b[t] = std::max(0.0, r * cv.v[t] - lambda);
        Pb += a.phi_b[t];
        m.add_var(Pb - pa.cost);
    }
    std::vector<std::pair<int, double>> occ, flow;
    for (std::int64_t t = 0; t < T; ++t) {
        occ.emplace_back(static_cast<int>(t), t + 1.0);
        occ.emplace_back(static_cast<int>(T + t), t + 1.0);
        flow.emplace_back(static_cast<int>(t), 1.0 - cv.u[t]);
        flow.emplace_back(static_cast<int>(T + t), -cv.v[t]);
    }
    m.add_row(std::move(occ), Rel::Le, 1.0);
    m.add_row(std::move(flow), Rel::Le, 0.0);
    LpSolution s = lp_solve(m);
    require_optimal(s, "probe arm LP");
    a.h = std::max(0.0, s.objective);
    a.p = std::max(0.0, s.dual[1]);
    a.zg.assign(s.x.begin(), s.x.begin() + T);
    a.zb.assign(s.x.begin() + T, s.x.end());
    a.xg.assign(T, 0.0);
    a.xb.assign(T, 0.0);
    double tail_g = 0.0, tail_b = 0.0;
    for (std::int64_t t = T - 1; t >= 0; --t) {
        tail_g += a.zg[t];
        tail_b += a.zb[t];
        if (a.phi_g[t] > 0.0) a.xg[t] = tail_g;
        if (a.phi_b[t] > 0.0) a.xb[t] = tail_b;
    }
    return a;
}

void extract_probe_params(const ProbeArm& pa, double lambda, ProbeArmParams& a, const ProbeOptions& tol) {
    a.active = a.h > tol.h;
    a.e = a.d = a.m = 0;
    a.identity_d = a.identity_e = 0.0;
    if (!a.active) return;
    for (std::int64_t t = 0; t < a.T && !a.e; ++t)
        if (a.zg[t] > tol.z) a.e = t + 1;
    for (std::int64_t t = 0; t < a.T && !a.d; ++t)
        if (a.zb[t] > tol.z) a.d = t + 1;
    if (!a.e || !a.d)
        throw Error(ErrorKind::MissingSupport, "arm with h = " + std::to_string(a.h) +
                                                   " has no " + (a.e ? "b" : "g") + "-probe time below T = " +
                                                   std::to_string(a.T));
    const FeedbackArm& f = pa.arm;
    double Pb = 0.0;
    for (std::int64_t l = 0; l < a.d; ++l) {
        Pb += a.phi_b[l];
        if (a.phi_b[l] > 0.0) ++a.m;
    }
    for (std::int64_t l = a.d - a.m; l < a.d; ++l)
        if (!(a.phi_b[l] > 0.0)) throw Error(ErrorKind::NumericFailure, "positive phi_b is not a suffix below d");
    a.identity_d = std::abs(a.d * a.h + pa.cost - belief_v(f, a.d) * a.p - Pb);
    double Rg = 0.0;
    for (std::int64_t t = 1; t <= a.e; ++t) Rg += f.r * belief_u(f, t);
    a.identity_e = std::abs(a.e * (lambda + a.h) - Rg + pa.cost + (1.0 - belief_u(f, a.e)) * a.p);
    const double scale = 1.0 + pa.cost + a.p + f.r * static_cast<double>(std::max(a.d, a.e));
    if (a.identity_d > tol.identity * scale || a.identity_e > tol.identity * scale)
        throw Error(ErrorKind::NumericFailure, "probe identities violated: " + std::to_string(a.identity_d) + ", " +
                                                   std::to_string(a.identity_e));
}

ProbePolicyParams solve_probe(const ProbeInstance& inst, const ProbeOptions& tol, std::vector<std::int64_t> T) {
    inst.validate();
    const std::size_t n = inst.arms.size();
    T = default_T(inst, std::move(T));
    std::vector<int> retries(n, 0);
    ProbePolicyParams out;
    out.M = inst.M;
    const double Md = static_cast<double>(inst.M);
    for (;;) {
        double hi = 0.0;
        for (const auto& a : inst.arms) hi = std::max(hi, a.arm.r);
        hi /= Md;
        double lo = 0.0;
        // M lambda - G(lambda) is increasing; its root is the balanced multiplier
        for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
            double mid = 0.5 * (lo + hi);
            (Md * mid < G_at(inst, T, mid, nullptr) ? lo : hi) = mid;
        }
        out.lambda = 0.5 * (lo + hi);
        out.arms.assign(n, {});
        out.sum_h = G_at(inst, T, out.lambda, &out.arms);
        bool again = false;
        for (std::size_t i = 0; i < n; ++i) {
            auto& a = out.arms[i];
            extract_probe_params(inst.arms[i], out.lambda, a, tol);
            a.retries = retries[i];
            if (a.active && 4 * std::max(a.d, a.e) > T[i] && retries[i] < tol.max_retries) {
                T[i] *= 2;
                ++retries[i];
                again = true;
            }
        }
        if (!again) break;
    }
    out.objective = Md * out.lambda + out.sum_h;
    out.balance_residual = std::abs(Md * out.lambda - out.sum_h);
    return out;
}

double probe_lp_value(const ProbeInstance& inst, std::vector<std::int64_t> T) {
    inst.validate();
    T = default_T(inst, std::move(T));
    const double Md = static_cast<double>(inst.M);
    double hi = 0.0;
    for (const auto& a : inst.arms) hi = std::max(hi, a.arm.r);
    auto f = [&](double l) { return Md * l + G_at(inst, T, l, nullptr); };
    // convex in lambda: golden-section search
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.0, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-12 * (1.0 + hi)) {
        if (fc <= fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(d);
        }
    }
    return std::min({f(0.0), f(0.5 * (a + b)), fc, fd});
}

ProbeAction probe_policy_next(const ProbePolicyParams& params, std::vector<ProbeArmState>& st) {
    int staged = 0;
    for (const auto& s : st) staged += s.stage != ProbeStage::None;
    // arms seen g outside a stage only arise at start-up; they go first
    for (int pass = 0; pass < 2 && staged < params.M; ++pass)
        for (std::size_t i = 0; i < st.size() && staged < params.M; ++i) {
            const auto& a = params.arms[i];
            auto& s = st[i];
            if (!a.active || s.stage != ProbeStage::None) continue;
            if (pass == 0 && s.last == Obs::g) {
                s.stage = ProbeStage::Second;
                s.left = a.e;
                ++staged;
            } else if (pass == 1 && s.last == Obs::b && s.t >= (a.m > 0 ? a.d - a.m + 1 : a.d)) {
                s.stage = ProbeStage::First;
                s.left = a.m;
                ++staged;
            }
        }
    ProbeAction act;
    for (std::size_t i = 0; i < st.size(); ++i) {
        const auto& s = st[i];
        if (s.stage == ProbeStage::None) continue;
        if (s.left > 0) act.plays.push_back(static_cast<int>(i));
        if (s.left <= 1) act.probes.push_back(static_cast<int>(i));
    }
    return act;
}

void probe_policy_advance(const ProbePolicyParams& params, std::vector<ProbeArmState>& st, const ProbeAction& act,
                          const std::vector<Obs>& probed_state) {
    for (int i : act.plays) --st[i].left;
    for (int i : act.probes) {
        auto& s = st[i];
        s.last = probed_state[i];
        s.t = 0;
        if (s.last == Obs::g) {
            s.stage = ProbeStage::Second;
            s.left = params.arms[i].e;
        } else {
            s.stage = ProbeStage::None;
            s.left = 0;
        }
    }
    for (auto& s : st) ++s.t;
}

SimResult simulate_probe(const ProbeInstance& inst, const ProbePolicyParams& params, const SimConfig& cfg) {
    cfg.validate();
    inst.validate();
    const std::size_t n = inst.arms.size();
    if (params.arms.size() != n) throw Error(ErrorKind::ShapeMismatch, "parameters do not match the instance");
    std::vector<double> rep_means, plays(n, 0.0);
    std::int64_t probes = 0;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(rep));
        std::vector<Obs> hidden(n);
        std::vector<ProbeArmState> st(n);
        for (std::size_t i = 0; i < n; ++i) {
            hidden[i] = rng.bernoulli(inst.arms[i].arm.stationary()) ? Obs::g : Obs::b;
            st[i].last = hidden[i];
        }
        auto step_hidden = [&] {
            for (std::size_t i = 0; i < n; ++i) {
                const auto& a = inst.arms[i].arm;
                double u = rng.uniform();
                if (hidden[i] == Obs::g) { if (u < a.beta) hidden[i] = Obs::b; }
                else if (u < a.alpha) hidden[i] = Obs::g;
            }
        };
        step_hidden();
        double total = 0.0;
        for (std::int64_t k = 0; k < cfg.horizon; ++k) {
            ProbeAction act = probe_policy_next(params, st);
            const bool measured = k >= cfg.burnin;
            double net = 0.0;
            for (int i : act.plays) {
                if (hidden[i] == Obs::g) net += inst.arms[i].arm.r;
                if (measured) plays[i] += 1.0;
            }
            for (int i : act.probes) net -= inst.arms[i].cost;
            if (measured) {
                total += net;
                probes += static_cast<std::int64_t>(act.probes.size());
            }
            probe_policy_advance(params, st, act, hidden);
            step_hidden();
        }
        rep_means.push_back(total / static_cast<double>(cfg.horizon - cfg.burnin));
    }
    SimResult out = finalize(std::move(rep_means), std::move(plays), static_cast<double>(cfg.horizon - cfg.burnin));
    out.probes = probes;
    out.crediting = "hidden-state";
    return out;
}

ProbeDriftReport probe_drift_certificate(const ProbeInstance& inst, const ProbePolicyParams& params) {
    ProbeDriftReport rep;
    const double lambda = params.lambda;
    for (std::size_t i = 0; i < inst.arms.size(); ++i) {
        const auto& a = params.arms[i];
        if (!a.active) continue;
        const FeedbackArm& f = inst.arms[i].arm;
        const double c = inst.arms[i].cost;
        // b-observed block started after t0 - 1 steps: m plays, a probe at the end, waiting potential spent
        auto stage1 = [&](std::int64_t t0) {
            double v = -c - static_cast<double>(a.d - a.m) * a.h;
            for (std::int64_t l = t0; l < t0 + a.m; ++l) v += f.r * belief_v(f, l);
            v += belief_v(f, a.m > 0 ? t0 + a.m - 1 : t0 - 1) * a.p;
            return v - static_cast<double>(a.m) * (lambda + a.h);
        };
        const std::int64_t nominal = a.d - a.m + 1;
        double m1 = stage1(nominal);
        double delayed = m1;
        for (std::int64_t t0 = nominal + 1; t0 <= std::max(a.T, nominal + 1); ++t0) delayed = std::min(delayed, stage1(t0));
        double v2 = -c - (1.0 - belief_u(f, a.e)) * a.p;
        for (std::int64_t t = 1; t <= a.e; ++t) v2 += f.r * belief_u(f, t);
        double m2 = v2 - static_cast<double>(a.e) * (lambda + a.h);
        if (std::min(m1, m2) < std::min(rep.stage1_margin, rep.stage2_margin)) rep.witness = static_cast<int>(i);
        rep.stage1_margin = std::min(rep.stage1_margin, m1);
        rep.stage2_margin = std::min(rep.stage2_margin, m2);
        rep.delayed_stage1_margin = std::min(rep.delayed_stage1_margin, delayed);
    }
    return rep;
}

}  // namespace rb
