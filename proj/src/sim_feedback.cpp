#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "rb/sim.hpp"

namespace rb {

void SimConfig::validate() const {
    if (horizon <= burnin || burnin < 0) throw Error(ErrorKind::InvalidInput, "need horizon > burnin >= 0");
    if (reps < 1) throw Error(ErrorKind::InvalidInput, "need reps >= 1");
}

Rng::Rng(std::uint64_t master, std::uint64_t rep) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
    eng_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

SimResult finalize(std::vector<double> rep_means, std::vector<double> play_sum, double measured_steps) {
    SimResult out;
    const double n = static_cast<double>(rep_means.size());
    double s = 0.0;
    for (double m : rep_means) s += m;
    out.mean = s / n;
    if (rep_means.size() > 1) {
        double ss = 0.0;
        for (double m : rep_means) ss += (m - out.mean) * (m - out.mean);
        out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    }
    out.rep_means = std::move(rep_means);
    out.play_rate.resize(play_sum.size());
    for (std::size_t i = 0; i < play_sum.size(); ++i) out.play_rate[i] = play_sum[i] / (measured_steps * n);
    return out;
}

FeedbackPolicy make_balanced_policy(const FeedbackPolicyParams& params) {
    return [params](const std::vector<BeliefState>& b) { return balanced_index_next(params, b); };
}

FeedbackPolicy make_myopic_policy(const std::vector<FeedbackArm>& arms) {
    return [arms](const std::vector<BeliefState>& b) {
        int best = -1;
        double bv = -1.0;
        for (std::size_t i = 0; i < arms.size(); ++i) {
            double v = arms[i].r * belief_g(arms[i], b[i]);
            if (v > bv) { bv = v; best = static_cast<int>(i); }
        }
        return best;
    };
}

FeedbackPolicy make_always_play_policy(int arm) {
    return [arm](const std::vector<BeliefState>&) { return arm; };
}

FeedbackPolicy make_fixed_wait_policy(std::int64_t t) {
    return [t](const std::vector<BeliefState>& b) {
        if (b[0].last == Obs::g || b[0].t >= t) return 0;
        return -1;
    };
}

FeedbackPolicy make_round_robin_policy(std::vector<int> subset) {
    return [subset](const std::vector<BeliefState>& b) {
        for (int i : subset)
            if (b[i].last == Obs::g && b[i].t == 1) return i;
        for (int i : subset)
            if (b[i].last == Obs::g) return i;
        int best = -1;
        std::int64_t bt = -1;
        for (int i : subset)
            if (b[i].t > bt) { bt = b[i].t; best = i; }
        return best;
    };
}

FeedbackPolicy make_region_policy(std::function<bool(std::int64_t, std::int64_t)> in_region) {
    return [in_region](const std::vector<BeliefState>& b) {
        for (int i : {1, 2})
            if (b[i].last == Obs::g && b[i].t == 1) return i;
        for (int i : {1, 2})
            if (b[i].last == Obs::g) return i;
        if (in_region(b[1].t, b[2].t)) return 0;
        return b[1].t > b[2].t ? 1 : 2;
    };
}

SimResult simulate(const FeedbackInstance& inst, const FeedbackPolicy& policy, const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n = inst.arms.size();
    if (n == 0) throw Error(ErrorKind::ShapeMismatch, "instance has no arms");
    std::vector<double> rep_means;
    std::vector<double> plays(n, 0.0);
    for (int rep = 0; rep < cfg.reps; ++rep) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(rep));
        std::vector<char> hidden(n);
        std::vector<BeliefState> bel(n);
        for (std::size_t i = 0; i < n; ++i) {
            // observed at time 0 from the stationary law, then one transition
            hidden[i] = rng.bernoulli(inst.arms[i].stationary()) ? 1 : 0;
            bel[i] = {hidden[i] ? Obs::g : Obs::b, 1};
        }
        auto step_hidden = [&] {
            for (std::size_t i = 0; i < n; ++i) {
                const auto& a = inst.arms[i];
                double u = rng.uniform();
                if (hidden[i]) { if (u < a.beta) hidden[i] = 0; }
                else if (u < a.alpha) hidden[i] = 1;
            }
        };
        step_hidden();
        double total = 0.0;
        for (std::int64_t k = 0; k < cfg.horizon; ++k) {
            int a = policy(bel);
            if (a >= static_cast<int>(n)) throw Error(ErrorKind::ShapeMismatch, "policy chose an unknown arm");
            bool measured = k >= cfg.burnin;
            if (a >= 0) {
                // last-observed crediting
                if (measured) {
                    if (bel[a].last == Obs::g) total += inst.arms[a].r;
                    plays[a] += 1.0;
                }
            }
            for (std::size_t i = 0; i < n; ++i) ++bel[i].t;
            if (a >= 0) bel[a] = {hidden[a] ? Obs::g : Obs::b, 1};
            step_hidden();
        }
        rep_means.push_back(total / static_cast<double>(cfg.horizon - cfg.burnin));
    }
    SimResult out = finalize(std::move(rep_means), std::move(plays), static_cast<double>(cfg.horizon - cfg.burnin));
    out.crediting = "last-observed";
    return out;
}

std::int64_t belief_cap(const FeedbackArm& arm, std::int64_t T_cap) {
    double l = std::log1p(-(arm.alpha + arm.beta));
    std::int64_t t = static_cast<std::int64_t>(std::ceil(std::log(1e-13) / l));
    return std::max<std::int64_t>(1, std::min(T_cap, t));
}

namespace {

// Mixed-radix code of capped joint beliefs; digit d < C is (g, d+1), d >= C is (b, d-C+1).
struct BeliefCodec {
    std::vector<std::int64_t> cap;
    std::vector<std::uint64_t> w;
    std::uint64_t size = 1;

    BeliefCodec(const FeedbackInstance& inst, std::int64_t T_cap, std::size_t max_states) {
        for (const auto& a : inst.arms) {
            std::int64_t c = belief_cap(a, T_cap);
            cap.push_back(c);
            w.push_back(size);
            double next = static_cast<double>(size) * static_cast<double>(2 * c);
            if (next > static_cast<double>(max_states))
                throw Error(ErrorKind::StateSpaceTooLarge, "joint capped belief space exceeds the state limit; lower T_cap");
            size *= static_cast<std::uint64_t>(2 * c);
        }
    }
    std::size_t n() const { return cap.size(); }
    std::uint64_t digit(std::uint64_t s, std::size_t i) const { return (s / w[i]) % static_cast<std::uint64_t>(2 * cap[i]); }
    BeliefState belief(std::uint64_t d, std::size_t i) const {
        std::int64_t c = cap[i], dd = static_cast<std::int64_t>(d);
        return dd < c ? BeliefState{Obs::g, dd + 1} : BeliefState{Obs::b, dd - c + 1};
    }
    std::uint64_t encode_one(const BeliefState& b, std::size_t i) const {
        std::int64_t t = std::min(b.t, cap[i]);
        return static_cast<std::uint64_t>(b.last == Obs::g ? t - 1 : cap[i] + t - 1);
    }
    std::uint64_t encode(const std::vector<BeliefState>& b) const {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < n(); ++i) s += encode_one(b[i], i) * w[i];
        return s;
    }
    std::vector<BeliefState> decode(std::uint64_t s) const {
        std::vector<BeliefState> b(n());
        for (std::size_t i = 0; i < n(); ++i) b[i] = belief(digit(s, i), i);
        return b;
    }
    std::uint64_t advance(std::uint64_t d, std::size_t i) const {
        std::uint64_t c = static_cast<std::uint64_t>(cap[i]);
        if (d < c) return std::min(d + 1, c - 1);
        return std::min(d + 1, 2 * c - 1);
    }
    std::uint64_t g1(std::size_t) const { return 0; }
    std::uint64_t b1(std::size_t i) const { return static_cast<std::uint64_t>(cap[i]); }
};

struct Transition {
    std::uint64_t to_g, to_b;
    double pg, reward;
    bool idle;
};

// successors of state s under action a
Transition transition(const FeedbackInstance& inst, const BeliefCodec& cd, std::uint64_t s, int a) {
    std::uint64_t adv = 0, dig_a = 0;
    for (std::size_t i = 0; i < cd.n(); ++i) {
        std::uint64_t d = cd.digit(s, i);
        if (static_cast<int>(i) == a) dig_a = d;
        adv += cd.advance(d, i) * cd.w[i];
    }
    if (a < 0) return {adv, adv, 1.0, 0.0, true};
    std::size_t ai = static_cast<std::size_t>(a);
    std::uint64_t base = adv - cd.advance(dig_a, ai) * cd.w[ai];
    double pg = belief_g(inst.arms[ai], cd.belief(dig_a, ai));
    return {base + cd.g1(ai) * cd.w[ai], base + cd.b1(ai) * cd.w[ai], pg, inst.arms[ai].r * pg, false};
}

}  // namespace

double exact_policy_eval(const FeedbackInstance& inst, const FeedbackPolicy& policy, const ExactOptions& opt) {
    BeliefCodec cd(inst, opt.T_cap, std::numeric_limits<std::size_t>::max() / 4);
    std::vector<BeliefState> start(inst.arms.size(), BeliefState{Obs::b, 1});
    std::unordered_map<std::uint64_t, std::uint32_t> id;
    std::vector<std::uint64_t> code;
    std::vector<Transition> tr;
    auto visit = [&](std::uint64_t s) {
        auto [it, fresh] = id.emplace(s, static_cast<std::uint32_t>(code.size()));
        if (fresh) {
            if (code.size() >= opt.max_states)
                throw Error(ErrorKind::StateSpaceTooLarge, "reachable joint space exceeds the state limit; lower T_cap");
            code.push_back(s);
        }
        return it->second;
    };
    visit(cd.encode(start));
    std::vector<std::uint32_t> sg, sb;
    std::vector<double> pg, rew;
    for (std::size_t k = 0; k < code.size(); ++k) {
        std::uint64_t s = code[k];
        int a = policy(cd.decode(s));
        if (a >= static_cast<int>(inst.arms.size())) throw Error(ErrorKind::ShapeMismatch, "policy chose an unknown arm");
        Transition t = transition(inst, cd, s, a);
        std::uint32_t ig = visit(t.to_g);
        std::uint32_t ib = visit(t.to_b);
        sg.push_back(ig);
        sb.push_back(ib);
        pg.push_back(t.pg);
        rew.push_back(t.reward);
    }
    const std::size_t N = code.size();
    std::vector<double> pi(N, 0.0), nx(N);
    pi[0] = 1.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        for (std::size_t k = 0; k < N; ++k) nx[k] = 0.5 * pi[k];
        for (std::size_t k = 0; k < N; ++k) {
            double m = 0.5 * pi[k];
            if (m == 0.0) continue;
            nx[sg[k]] += m * pg[k];
            nx[sb[k]] += m * (1.0 - pg[k]);
        }
        double res = 0.0;
        for (std::size_t k = 0; k < N; ++k) res += std::abs(nx[k] - pi[k]);
        pi.swap(nx);
        if (res < opt.tol) {
            double v = 0.0;
            for (std::size_t k = 0; k < N; ++k) v += pi[k] * rew[k];
            return v;
        }
    }
    throw Error(ErrorKind::NoConvergence, "power iteration did not reach the residual target");
}

ViResult vi_optimal(const FeedbackInstance& inst, double gamma, std::int64_t T_cap, double tol, int max_sweeps,
                    std::size_t max_states) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::ParameterOutOfRange, "gamma must be in (0,1)");
    auto cdp = std::make_shared<BeliefCodec>(inst, T_cap, max_states);
    const BeliefCodec& cd = *cdp;
    const std::size_t N = cd.size, n = cd.n();
    std::vector<std::uint32_t> sg(N * n), sb(N * n);
    std::vector<double> pg(N * n), rew(N * n);
    for (std::uint64_t s = 0; s < N; ++s)
        for (std::size_t a = 0; a < n; ++a) {
            Transition t = transition(inst, cd, s, static_cast<int>(a));
            sg[s * n + a] = static_cast<std::uint32_t>(t.to_g);
            sb[s * n + a] = static_cast<std::uint32_t>(t.to_b);
            pg[s * n + a] = t.pg;
            rew[s * n + a] = t.reward;
        }
    std::vector<double> V(N, 0.0);
    int sweeps = 0;
    for (;;) {
        if (sweeps >= max_sweeps) throw Error(ErrorKind::NoConvergence, "value iteration hit max_sweeps");
        ++sweeps;
        double delta = 0.0;
        for (std::size_t s = 0; s < N; ++s) {
            double best = -1e300;
            for (std::size_t a = 0; a < n; ++a) {
                std::size_t k = s * n + a;
                double q = rew[k] + gamma * (pg[k] * V[sg[k]] + (1.0 - pg[k]) * V[sb[k]]);
                best = std::max(best, q);
            }
            delta = std::max(delta, std::abs(best - V[s]));
            V[s] = best;
        }
        if (delta < tol) break;
    }
    auto table = std::make_shared<std::vector<std::uint8_t>>(N);
    for (std::size_t s = 0; s < N; ++s) {
        double best = -1e300;
        for (std::size_t a = 0; a < n; ++a) {
            std::size_t k = s * n + a;
            double q = rew[k] + gamma * (pg[k] * V[sg[k]] + (1.0 - pg[k]) * V[sb[k]]);
            if (q > best + 1e-12 * (1.0 + std::abs(best))) {
                best = q;
                (*table)[s] = static_cast<std::uint8_t>(a);
            }
        }
    }
    ViResult out;
    out.sweeps = sweeps;
    out.policy = [cdp, table](const std::vector<BeliefState>& b) { return static_cast<int>((*table)[cdp->encode(b)]); };
    ExactOptions eo;
    eo.T_cap = T_cap;
    out.average_reward = exact_policy_eval(inst, out.policy, eo);
    return out;
}

DriftReport feedback_lyapunov_check(const FeedbackInstance& inst, const FeedbackPolicyParams& params,
                                    std::size_t max_states) {
    // local digit per active arm: 0 = (g,1); k in 1..t_i = (b,k) with k = t_i meaning "at least t_i"
    std::vector<int> act;
    for (std::size_t i = 0; i < inst.arms.size(); ++i)
        if (params.arms[i].active) act.push_back(static_cast<int>(i));
    DriftReport rep;
    rep.bound = (1.0 - params.eps) * params.lambda_lower;
    if (act.empty()) throw Error(ErrorKind::AllArmsInactive, "no active arms");
    const std::size_t m = act.size();
    std::vector<std::uint64_t> radix(m), w(m);
    double total = 1.0;
    std::uint64_t acc = 1;
    for (std::size_t k = 0; k < m; ++k) {
        std::int64_t t = params.arms[act[k]].t;
        if (t > 1000000) throw Error(ErrorKind::StateSpaceTooLarge, "tight time too large to enumerate");
        radix[k] = static_cast<std::uint64_t>(t + 1);
        w[k] = acc;
        total *= static_cast<double>(radix[k]);
        if (total < 1.8e19) acc *= radix[k];
    }
    if (total >= 1.8e19) throw Error(ErrorKind::StateSpaceTooLarge, "drift abstraction does not fit 64-bit codes");
    auto dig = [&](std::uint64_t s, std::size_t k) { return (s / w[k]) % radix[k]; };
    auto describe = [&](std::uint64_t s) {
        std::ostringstream os;
        for (std::size_t k = 0; k < m; ++k) {
            std::uint64_t d = dig(s, k);
            os << (k ? " " : "") << "arm" << act[k] << (d == 0 ? "=(g,1)" : "=(b," + std::to_string(d) + ")");
        }
        return os.str();
    };
    std::uint64_t start = 0;
    for (std::size_t k = 0; k < m; ++k) start += w[k];
    std::unordered_map<std::uint64_t, char> seen;
    std::deque<std::uint64_t> q{start};
    seen[start] = 1;
    rep.min_drift = 1e300;
    auto push = [&](std::uint64_t s) {
        if (seen.emplace(s, 1).second) {
            if (seen.size() > max_states) throw Error(ErrorKind::StateSpaceTooLarge, "reachable drift states exceed limit");
            q.push_back(s);
        }
    };
    while (!q.empty()) {
        std::uint64_t s = q.front();
        q.pop_front();
        std::vector<std::uint64_t> d(m);
        for (std::size_t k = 0; k < m; ++k) d[k] = dig(s, k);
        // candidate actions: lowest good arm; else every ready arm (the true tie-break uses uncapped t)
        std::vector<int> cand;
        for (std::size_t k = 0; k < m && cand.empty(); ++k)
            if (d[k] == 0) cand.push_back(static_cast<int>(k));
        if (cand.empty())
            for (std::size_t k = 0; k < m; ++k)
                if (d[k] == radix[k] - 1) cand.push_back(static_cast<int>(k));
        auto advance_others = [&](int played, double& drift) {
            std::uint64_t nx = 0;
            for (std::size_t k = 0; k < m; ++k) {
                if (static_cast<int>(k) == played) continue;
                std::uint64_t dk = d[k];
                if (dk >= 1 && dk < radix[k] - 1) {
                    drift += params.arms[act[k]].h;
                    ++dk;
                }
                nx += dk * w[k];
            }
            return nx;
        };
        if (cand.empty()) {
            double drift = 0.0;
            push(advance_others(-1, drift));
            if (drift < rep.min_drift) { rep.min_drift = drift; rep.witness = describe(s) + " idle"; }
            continue;
        }
        for (int k : cand) {
            const FeedbackArm& arm = inst.arms[act[k]];
            const FeedbackArmParams& ap = params.arms[act[k]];
            double drift = 0.0;
            std::uint64_t base = advance_others(k, drift);
            if (d[k] == 0) {
                drift += arm.r - arm.beta * ap.p;
            } else {
                double v = belief_v(arm, ap.t);
                drift += v * ap.p - ap.h * static_cast<double>(ap.t - 1);
            }
            push(base);                // observed g
            push(base + 1 * w[k]);     // observed b
            if (drift < rep.min_drift) {
                rep.min_drift = drift;
                rep.witness = describe(s) + " play arm" + std::to_string(act[k]);
            }
        }
    }
    rep.states = seen.size();
    return rep;
}

}  // namespace rb
