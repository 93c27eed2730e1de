#include "rb/monotone.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace rb {

namespace {

double qsum(const MonotoneArm& a, int k) {
    double s = 0.0;
    for (double v : a.q[k]) s += v;
    return s;
}

double delta_p(const MonotoneArm& a, const std::vector<double>& p, int k) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (static_cast<int>(j) != k) s += a.q[k][j] * (p[j] - p[k]);
    return s;
}

double cost_of(const MonotoneInstance& inst, std::size_t i) {
    double c = inst.switch_out.empty() ? 0.0 : inst.switch_out[i];
    double s = inst.switch_in.empty() ? 0.0 : inst.switch_in[i];
    return c + s;
}

// f(t) * (sum_j q_kj p_j - Q_k p_k) as coefficients on the p variables
void add_flow_terms(std::map<int, double>& row, const MonotoneArm& a, const std::vector<int>& pv, int k,
                    double f, double sign) {
    if (f == 0.0) return;
    row[pv[k]] += sign * f * qsum(a, k);
    for (std::size_t j = 0; j < a.size(); ++j)
        if (static_cast<int>(j) != k && a.q[k][j] != 0.0) row[pv[j]] -= sign * f * a.q[k][j];
}

std::vector<std::pair<int, double>> to_coef(const std::map<int, double>& m) {
    std::vector<std::pair<int, double>> out;
    for (auto [j, v] : m)
        if (v != 0.0) out.emplace_back(j, v);
    return out;
}

}  // namespace

const char* variant_name(MonotoneVariant v) {
    switch (v) {
        case MonotoneVariant::Base: return "base";
        case MonotoneVariant::Multiplay: return "multiplay";
        case MonotoneVariant::Switching: return "switching";
    }
    return "?";
}

MonotoneVariant parse_variant(const std::string& s) {
    if (s == "base") return MonotoneVariant::Base;
    if (s == "multiplay") return MonotoneVariant::Multiplay;
    if (s == "switching") return MonotoneVariant::Switching;
    throw Error(ErrorKind::InvalidInput, "unknown variant '" + s + "'");
}

MonotoneVariant natural_variant(const MonotoneInstance& inst) {
    if (inst.has_switching()) return MonotoneVariant::Switching;
    if (inst.M > 1 || inst.has_durations()) return MonotoneVariant::Multiplay;
    return MonotoneVariant::Base;
}

void check_variant(const MonotoneInstance& inst, MonotoneVariant v) {
    inst.validate();
    auto bad = [&](const std::string& why) {
        throw Error(ErrorKind::VariantMismatch, std::string(variant_name(v)) + " variant: " + why);
    };
    switch (v) {
        case MonotoneVariant::Base:
            if (inst.M != 1) bad("needs M = 1");
            if (inst.has_durations()) bad("needs unit durations");
            if (inst.has_switching()) bad("instance has switching costs");
            break;
        case MonotoneVariant::Multiplay:
            if (inst.has_switching()) bad("instance has switching costs");
            break;
        case MonotoneVariant::Switching:
            if (inst.has_durations()) bad("switching costs cannot be combined with durations > 1");
            if (inst.M != 1) bad("needs M = 1");
            break;
    }
}

BalanceLp build_balance_lp(const MonotoneInstance& inst, MonotoneVariant v, bool balanced) {
    check_variant(inst, v);
    BalanceLp out;
    out.variant = v;
    out.balanced = balanced;
    LpModel& m = out.model;
    const double M = static_cast<double>(inst.M);
    out.lambda = m.add_var(M, 0.0, kInf, "lambda");
    const std::size_t n = inst.arms.size();
    out.h.resize(n);
    out.p.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.h[i] = m.add_var(1.0, 0.0, kInf, "h" + std::to_string(i));
        for (std::size_t k = 0; k < inst.arms[i].size(); ++k) {
            double lo = k == 0 ? 0.0 : -kInf, hi = k == 0 ? 0.0 : kInf;
            out.p[i].push_back(m.add_var(0.0, lo, hi, "p" + std::to_string(i) + "_" + std::to_string(k)));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const MonotoneArm& a = inst.arms[i];
        const double cs = cost_of(inst, i);
        for (std::size_t k = 0; k < a.size(); ++k) {
            const MonotoneState& st = a.states[k];
            const double L = static_cast<double>(st.duration);
            for (auto [t, f] : st.f.breakpoints()) {
                const double td = static_cast<double>(t);
                const int ki = static_cast<int>(k);
                if (v == MonotoneVariant::Switching) {
                    std::map<int, double> r0{{out.lambda, 1.0}, {out.h[i], td}};
                    add_flow_terms(r0, a, out.p[i], ki, f, 1.0);
                    m.add_row(to_coef(r0), Rel::Ge, st.r - cs);
                    out.tags.push_back({static_cast<int>(i), ki, t, 0});
                    std::map<int, double> r1{{out.lambda, td}, {out.h[i], td}};
                    add_flow_terms(r1, a, out.p[i], ki, f, 1.0);
                    m.add_row(to_coef(r1), Rel::Ge, st.r);
                    out.tags.push_back({static_cast<int>(i), ki, t, 1});
                } else {
                    std::map<int, double> r{{out.lambda, L}, {out.h[i], L + td - 1.0}};
                    add_flow_terms(r, a, out.p[i], ki, f, 1.0);
                    m.add_row(to_coef(r), Rel::Ge, st.r);
                    out.tags.push_back({static_cast<int>(i), ki, t, 0});
                }
            }
        }
    }
    if (balanced) {
        std::vector<std::pair<int, double>> row{{out.lambda, M}};
        for (int hv : out.h) row.emplace_back(hv, -1.0);
        out.balance_row = m.add_row(row, Rel::Eq, 0.0, "balance");
    }
    return out;
}

LpModel build_whittle_lp(const MonotoneInstance& inst, MonotoneVariant v) {
    check_variant(inst, v);
    LpModel m;
    m.sense = Sense::Max;
    const std::size_t n = inst.arms.size();
    std::vector<std::pair<int, double>> budget;
    for (std::size_t i = 0; i < n; ++i) {
        const MonotoneArm& a = inst.arms[i];
        const std::size_t K = a.size();
        const double cs = cost_of(inst, i);
        std::vector<std::pair<int, double>> occupancy;
        // flow[k]: outflow minus inflow of state k
        std::vector<std::map<int, double>> flow(K);
        for (std::size_t k = 0; k < K; ++k) {
            const MonotoneState& st = a.states[k];
            const double L = static_cast<double>(st.duration);
            const double Q = qsum(a, static_cast<int>(k));
            for (auto [t, f] : st.f.breakpoints()) {
                const double td = static_cast<double>(t);
                auto add_col = [&](double reward, double budget_coef, double occ_coef) {
                    int x = m.add_var(reward);
                    budget.emplace_back(x, budget_coef);
                    occupancy.emplace_back(x, occ_coef);
                    if (f != 0.0) {
                        flow[k][x] += f * Q;
                        for (std::size_t j = 0; j < K; ++j)
                            if (j != k && a.q[k][j] != 0.0) flow[j][x] -= f * a.q[k][j];
                    }
                };
                if (v == MonotoneVariant::Switching) {
                    add_col(st.r - cs, 1.0, td);  // switched in
                    add_col(st.r, td, td);        // stayed
                } else {
                    add_col(st.r, L, td + L - 1.0);
                }
            }
        }
        m.add_row(occupancy, Rel::Le, 1.0);
        for (std::size_t k = 0; k < K; ++k) m.add_row(to_coef(flow[k]), Rel::Eq, 0.0);
    }
    m.add_row(budget, Rel::Le, static_cast<double>(inst.M));
    return m;
}

double whittle_lp_value(const MonotoneInstance& inst, MonotoneVariant v) {
    LpSolution s = lp_solve(build_whittle_lp(inst, v));
    require_optimal(s, "monotone Whittle LP");
    return s.objective;
}

double always_play_rate(const MonotoneArm& arm) {
    const int K = static_cast<int>(arm.size());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(K, K);
    for (int k = 0; k < K; ++k) {
        double f = arm.states[k].f(1);
        double out = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != k) { P(k, j) = arm.q[k][j] * f; out += P(k, j); }
        P(k, k) = 1.0 - out;
    }
    // reachability closure
    std::vector<std::vector<char>> R(K, std::vector<char>(K, 0));
    for (int s = 0; s < K; ++s) {
        std::vector<int> stack{s};
        R[s][s] = 1;
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            for (int b = 0; b < K; ++b)
                if (P(a, b) > 0.0 && !R[s][b]) { R[s][b] = 1; stack.push_back(b); }
        }
    }
    std::vector<int> cls(K, -1);
    std::vector<double> rate;
    for (int s = 0; s < K; ++s) {
        if (cls[s] >= 0) continue;
        bool closed = true;
        for (int b = 0; b < K; ++b)
            if (R[s][b] && !R[b][s]) closed = false;
        if (!closed) continue;
        std::vector<int> members;
        for (int b = 0; b < K; ++b)
            if (R[s][b]) { members.push_back(b); cls[b] = static_cast<int>(rate.size()); }
        const int m = static_cast<int>(members.size());
        Eigen::MatrixXd A(m, m);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) A(b, a) = P(members[a], members[b]) - (a == b ? 1.0 : 0.0);
        A.row(m - 1).setOnes();
        rhs(m - 1) = 1.0;
        Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
        double num = 0.0, den = 0.0;
        for (int a = 0; a < m; ++a) {
            num += pi(a) * arm.states[members[a]].r;
            den += pi(a) * static_cast<double>(arm.states[members[a]].duration);
        }
        rate.push_back(num / den);
    }
    if (cls[0] >= 0) return rate[cls[0]];
    // absorption from the transient states
    std::vector<int> tr;
    std::vector<int> pos(K, -1);
    for (int s = 0; s < K; ++s)
        if (cls[s] < 0) { pos[s] = static_cast<int>(tr.size()); tr.push_back(s); }
    const int m = static_cast<int>(tr.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (int a = 0; a < m; ++a)
        for (int s = 0; s < K; ++s) {
            if (pos[s] >= 0) A(a, pos[s]) -= P(tr[a], s);
            else b(a) += P(tr[a], s) * rate[cls[s]];
        }
    Eigen::VectorXd val = A.fullPivLu().solve(b);
    return val(pos[0]);
}

BalanceSolution extract_policy_params(const MonotoneInstance& inst, const BalanceLp& lp, const LpSolution& sol,
                                      const ExtractTolerances& tol) {
    require_optimal(sol, "balance LP");
    BalanceSolution out;
    out.variant = lp.variant;
    out.M = inst.M;
    out.lambda = sol.x[lp.lambda];
    out.objective = sol.objective;
    out.primal_residual = sol.primal_residual;
    out.cs_residual = check_complementary_slackness(lp.model, sol).max();
    const std::size_t n = inst.arms.size();
    out.arms.resize(n);
    out.switch_cost.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.switch_cost[i] = cost_of(inst, i);
        MonotoneArmParams& ap = out.arms[i];
        ap.h = sol.x[lp.h[i]];
        out.sum_h += ap.h;
        ap.active = ap.h > tol.h;
        for (int pv : lp.p[i]) ap.p.push_back(sol.x[pv]);
        const std::size_t K = inst.arms[i].size();
        for (std::size_t k = 0; k < K; ++k) ap.dP.push_back(delta_p(inst.arms[i], ap.p, static_cast<int>(k)));
        ap.t.assign(K, 0);
        ap.good.assign(K, 0);
    }
    out.balance_residual = std::abs(static_cast<double>(inst.M) * out.lambda - out.sum_h);

    // per (arm, state): first tight row in increasing t
    std::vector<std::vector<std::int64_t>> first_tight(n), family(n);
    std::vector<std::vector<char>> tight_at_one(n);
    for (std::size_t i = 0; i < n; ++i) {
        first_tight[i].assign(inst.arms[i].size(), 0);
        family[i].assign(inst.arms[i].size(), -1);
        tight_at_one[i].assign(inst.arms[i].size(), 0);
    }
    for (std::size_t r = 0; r < lp.tags.size(); ++r) {
        const BalanceRowTag& tg = lp.tags[r];
        const LpRow& row = lp.model.rows[r];
        double slack = sol.row_activity(lp.model, static_cast<int>(r)) - row.rhs;
        if (slack > tol.tight * (1.0 + std::abs(row.rhs))) continue;
        std::int64_t& ft = first_tight[tg.arm][tg.state];
        if (tg.t == 1 && (lp.variant != MonotoneVariant::Switching || tg.family == 1))
            tight_at_one[tg.arm][tg.state] = 1;
        if (ft == 0 || tg.t < ft) {
            ft = tg.t;
            family[tg.arm][tg.state] = tg.family;
        } else if (tg.t == ft && tg.family == 1) {
            family[tg.arm][tg.state] = 1;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        MonotoneArmParams& ap = out.arms[i];
        if (!ap.active) continue;
        const MonotoneArm& a = inst.arms[i];
        bool complete = true;
        int missing = -1;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (lp.variant == MonotoneVariant::Switching) {
                ap.good[k] = family[i][k] == 1;
            } else {
                ap.good[k] = ap.dP[k] < -tol.cs;
            }
            if (first_tight[i][k] == 0 || (ap.good[k] && lp.variant != MonotoneVariant::Switching &&
                                           !tight_at_one[i][k])) {
                complete = false;
                if (missing < 0) missing = static_cast<int>(k);
                ap.t[k] = a.states[k].f.last_t();
            } else {
                ap.t[k] = ap.good[k] && lp.variant != MonotoneVariant::Switching ? 1 : first_tight[i][k];
            }
        }
        ap.play_rate = always_play_rate(a);
        double target = out.lambda + ap.h;
        ap.u1 = ap.play_rate >= target - 1e-7 * (1.0 + target);
        if (!complete && !ap.u1) {
            std::ostringstream os;
            os << "arm " << i << " state " << missing << " has no tight constraint (h = " << ap.h
               << ", continuous-play rate " << ap.play_rate << " < lambda + h = " << target << ")";
            throw Error(ErrorKind::NoTightConstraint, os.str());
        }
    }
    return out;
}

BalanceSolution solve_balance(const MonotoneInstance& inst, MonotoneVariant v) {
    BalanceLp lp = build_balance_lp(inst, v, true);
    LpSolution s = lp_solve_dual(lp.model);
    require_optimal(s, "balance LP");
    return extract_policy_params(inst, lp, s);
}

MonotonePolicyState initial_policy_state(const MonotoneInstance& inst) {
    MonotonePolicyState st;
    const std::size_t n = inst.arms.size();
    st.k.assign(n, 0);
    st.y.assign(n, 1);
    st.lock.assign(n, 0);
    return st;
}

std::vector<int> monotone_index_next(const BalanceSolution& sol, const MonotoneInstance& inst,
                                     const MonotonePolicyState& st) {
    const int n = static_cast<int>(inst.arms.size());
    std::vector<int> plays;
    auto ready = [&](int i) { return st.y[i] >= sol.arms[i].t[st.k[i]]; };

    if (sol.variant == MonotoneVariant::Switching) {
        for (int i = 0; i < n; ++i)
            if (sol.arms[i].active && sol.arms[i].u1) return {i};
        int c = st.current;
        if (c >= 0 && sol.arms[c].active && sol.arms[c].good[st.k[c]]) {
            if (ready(c)) plays.push_back(c);
            return plays;
        }
        for (int i = 0; i < n; ++i)
            if (sol.arms[i].active && ready(i)) return {i};
        return plays;
    }

    // the first min(M, |U1|) continuous arms own a player each
    std::vector<char> dedicated(n, 0);
    int nd = 0;
    for (int i = 0; i < n && nd < inst.M; ++i)
        if (sol.arms[i].active && sol.arms[i].u1) { dedicated[i] = 1; ++nd; }
    int shared_busy = 0;
    for (int i = 0; i < n; ++i) {
        if (dedicated[i] && st.lock[i] == 0) plays.push_back(i);
        if (!dedicated[i] && st.lock[i] > 0) ++shared_busy;
    }
    int free = inst.M - nd - shared_busy;
    auto candidate = [&](int i) {
        return sol.arms[i].active && !sol.arms[i].u1 && st.lock[i] == 0;
    };
    for (int i = 0; i < n && free > 0; ++i)
        if (candidate(i) && sol.arms[i].good[st.k[i]]) { plays.push_back(i); --free; }
    for (int i = 0; i < n && free > 0; ++i)
        if (candidate(i) && !sol.arms[i].good[st.k[i]] && ready(i)) { plays.push_back(i); --free; }
    return plays;
}

SimResult simulate_monotone(const MonotoneInstance& inst, const BalanceSolution& sol, const SimConfig& cfg,
                            const MonotoneObserver& observer) {
    cfg.validate();
    const std::size_t n = inst.arms.size();
    const double measured = static_cast<double>(cfg.horizon - cfg.burnin);
    std::vector<double> rep_means, play_sum(n, 0.0);
    std::int64_t switches = 0;
    double paid = 0.0;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(rep));
        MonotonePolicyState st = initial_policy_state(inst);
        std::vector<double> pending_f(n, 0.0);
        double total = 0.0;
        for (std::int64_t step = 0; step < cfg.horizon; ++step) {
            const bool measure = step >= cfg.burnin;
            std::vector<int> plays = monotone_index_next(sol, inst, st);
            double reward = 0.0, cost = 0.0;
            for (int i : plays) {
                const MonotoneState& s = inst.arms[i].states[st.k[i]];
                reward += s.r;
                if (sol.variant == MonotoneVariant::Switching) {
                    if (st.current >= 0 && st.current != i) {
                        double c = (inst.switch_out.empty() ? 0.0 : inst.switch_out[st.current]) +
                                   (inst.switch_in.empty() ? 0.0 : inst.switch_in[i]);
                        cost += c;
                        if (measure) { ++switches; paid += c; }
                    }
                    st.current = i;
                }
                st.lock[i] = s.duration;
                pending_f[i] = s.f(st.y[i]);
                if (measure) play_sum[i] += 1.0;
            }
            if (observer) observer(rep, step, plays, reward, cost);
            if (measure) total += reward - cost;
            for (std::size_t i = 0; i < n; ++i) {
                if (st.lock[i] > 0) {
                    if (--st.lock[i] > 0) continue;
                    const MonotoneArm& a = inst.arms[i];
                    const int k = st.k[i];
                    double u = rng.uniform();
                    double acc = 0.0;
                    for (std::size_t j = 0; j < a.size(); ++j) {
                        if (static_cast<int>(j) == k) continue;
                        acc += a.q[k][j] * pending_f[i];
                        if (u < acc) { st.k[i] = static_cast<int>(j); break; }
                    }
                    st.y[i] = 1;
                } else {
                    ++st.y[i];
                }
            }
        }
        rep_means.push_back(total / measured);
    }
    SimResult out = finalize(std::move(rep_means), std::move(play_sum), measured);
    out.switches = switches;
    out.switch_cost_paid = paid;
    out.crediting = "play-start";
    return out;
}

MonotoneDriftReport monotone_lyapunov_check(const MonotoneInstance& inst, const BalanceSolution& sol,
                                            std::size_t max_states) {
    if (sol.variant != MonotoneVariant::Base)
        throw Error(ErrorKind::VariantMismatch, "exact drift enumeration covers the base variant only");
    MonotoneDriftReport rep;
    rep.bound = sol.lambda;
    const int n = static_cast<int>(inst.arms.size());
    for (int i = 0; i < n; ++i)
        if (sol.arms[i].active && sol.arms[i].u1) {
            rep.min_drift = rep.min_play = sol.arms[i].play_rate;
            rep.min_idle = kInf;
            rep.states = 1;
            rep.witness = "arm " + std::to_string(i) + " played continuously";
            return rep;
        }
    std::vector<int> act;
    for (int i = 0; i < n; ++i)
        if (sol.arms[i].active) act.push_back(i);
    const int na = static_cast<int>(act.size());
    if (na == 0) {
        rep.min_drift = rep.min_idle = 0.0;
        rep.min_play = kInf;
        rep.states = 1;
        rep.witness = "no active arm";
        return rep;
    }
    // per active arm: offset of each state's y-range inside the arm's digit
    std::vector<std::vector<std::int64_t>> cap(na), off(na);
    std::vector<std::uint64_t> radix(na);
    long double space = 1.0L;
    for (int a = 0; a < na; ++a) {
        const MonotoneArm& arm = inst.arms[act[a]];
        std::int64_t total = 0;
        for (std::size_t k = 0; k < arm.size(); ++k) {
            std::int64_t c = std::max<std::int64_t>(sol.arms[act[a]].t[k], arm.states[k].f.last_t());
            cap[a].push_back(c);
            off[a].push_back(total);
            total += c;
        }
        radix[a] = static_cast<std::uint64_t>(total);
        space *= static_cast<long double>(total);
    }
    if (space > 1.8e19L) throw Error(ErrorKind::StateSpaceTooLarge, "joint state code overflows 64 bits");

    MonotonePolicyState st = initial_policy_state(inst);
    auto encode = [&](const MonotonePolicyState& s) {
        std::uint64_t code = 0;
        for (int a = na - 1; a >= 0; --a) {
            int i = act[a];
            code = code * radix[a] + static_cast<std::uint64_t>(off[a][s.k[i]] + s.y[i] - 1);
        }
        return code;
    };
    auto decode = [&](std::uint64_t code, MonotonePolicyState& s) {
        for (int a = 0; a < na; ++a) {
            int i = act[a];
            std::int64_t d = static_cast<std::int64_t>(code % radix[a]);
            code /= radix[a];
            int k = 0;
            while (k + 1 < static_cast<int>(off[a].size()) && off[a][k + 1] <= d) ++k;
            s.k[i] = k;
            s.y[i] = d - off[a][k] + 1;
        }
    };

    std::unordered_map<std::uint64_t, char> seen;
    std::vector<std::uint64_t> frontier{encode(st)};
    seen[frontier[0]] = 1;
    rep.min_drift = rep.min_play = rep.min_idle = kInf;
    while (!frontier.empty()) {
        std::uint64_t code = frontier.back();
        frontier.pop_back();
        decode(code, st);
        // from a clean start a G arm is played the step it enters G, so a second G arm or a
        // G arm left waiting only arises from the initial placement
        int goods = 0;
        bool stale = false;
        for (int a = 0; a < na; ++a) {
            int i = act[a];
            if (!sol.arms[i].good[st.k[i]]) continue;
            ++goods;
            stale = stale || st.y[i] > 1;
        }
        const bool transient = goods > 1 || stale;
        std::vector<int> plays = monotone_index_next(sol, inst, st);
        const int played = plays.empty() ? -1 : plays[0];
        double drift = 0.0;
        for (int a = 0; a < na; ++a) {
            int i = act[a];
            const MonotoneArmParams& ap = sol.arms[i];
            int k = st.k[i];
            std::int64_t tk = ap.t[k];
            if (i == played) {
                const MonotoneState& s = inst.arms[i].states[k];
                drift += s.r + s.f(st.y[i]) * ap.dP[k] - ap.h * static_cast<double>(std::min(st.y[i], tk) - 1);
            } else if (st.y[i] < tk) {
                drift += ap.h;
            }
        }
        if (transient) {
            ++rep.transient_states;
        } else {
            if (drift < rep.min_drift) {
                rep.min_drift = drift;
                std::ostringstream os;
                for (int a = 0; a < na; ++a) os << (a ? " " : "") << "(" << st.k[act[a]] << "," << st.y[act[a]] << ")";
                os << (played < 0 ? " idle" : " play " + std::to_string(played));
                rep.witness = os.str();
            }
            if (played < 0) rep.min_idle = std::min(rep.min_idle, drift);
            else rep.min_play = std::min(rep.min_play, drift);
        }
        // successors
        MonotonePolicyState nx = st;
        for (int a = 0; a < na; ++a) {
            int i = act[a];
            if (i != played) nx.y[i] = std::min(st.y[i] + 1, cap[a][st.k[i]]);
        }
        std::vector<int> targets;
        if (played < 0) {
            targets.push_back(-1);
        } else {
            const MonotoneArm& arm = inst.arms[played];
            const int k = st.k[played];
            double f = arm.states[k].f(st.y[played]);
            double stay = 1.0;
            for (std::size_t j = 0; j < arm.size(); ++j)
                if (static_cast<int>(j) != k && arm.q[k][j] * f > 0.0) { targets.push_back(static_cast<int>(j)); stay -= arm.q[k][j] * f; }
            if (stay > 0.0) targets.push_back(k);
        }
        for (int j : targets) {
            if (played >= 0) { nx.k[played] = j; nx.y[played] = 1; }
            std::uint64_t c = encode(nx);
            if (seen.emplace(c, 1).second) {
                if (seen.size() > max_states) throw Error(ErrorKind::StateSpaceTooLarge, "drift enumeration exceeds state limit");
                frontier.push_back(c);
            }
        }
    }
    rep.states = seen.size();
    return rep;
}

double monotone_amortized_margin(const MonotoneInstance& inst, const BalanceSolution& sol) {
    double worst = kInf;
    for (std::size_t i = 0; i < inst.arms.size(); ++i) {
        const MonotoneArmParams& ap = sol.arms[i];
        if (!ap.active) continue;
        if (ap.u1) {
            worst = std::min(worst, ap.play_rate - (sol.lambda + ap.h));
            continue;
        }
        const MonotoneArm& a = inst.arms[i];
        for (std::size_t k = 0; k < a.size(); ++k) {
            const MonotoneState& s = a.states[k];
            const std::int64_t tk = ap.t[k];
            const double L = static_cast<double>(s.duration);
            std::vector<std::int64_t> ys{tk};
            for (auto [t, f] : s.f.breakpoints())
                if (t > tk) ys.push_back(t);
            if (ap.good[k]) ys.resize(1);
            for (std::int64_t y : ys) {
                double gain = s.r + s.f(y) * ap.dP[k];
                double m;
                if (sol.variant == MonotoneVariant::Switching) {
                    if (ap.good[k]) m = gain - static_cast<double>(tk) * (sol.lambda + ap.h);
                    else m = gain - sol.switch_cost[i] - ap.h * static_cast<double>(tk - 1) - (sol.lambda + ap.h);
                } else {
                    m = gain - ap.h * static_cast<double>(tk - 1) - L * (sol.lambda + ap.h);
                }
                worst = std::min(worst, m);
            }
        }
    }
    return worst;
}

MonotoneInstance encode_feedback(const FeedbackInstance& inst, std::int64_t T) {
    MonotoneInstance out;
    out.M = inst.M;
    for (const FeedbackArm& fa : inst.arms) {
        std::int64_t Ti = T > 0 ? T : mixing_horizon(fa);
        std::vector<std::pair<std::int64_t, double>> fg, fb;
        double lg = 0.0, lb = 0.0;
        for (std::int64_t t = 1; t <= Ti; ++t) {
            lg = std::max(lg, 1.0 - belief_u(fa, t));
            lb = std::max(lb, belief_v(fa, t));
            fg.emplace_back(t, lg);
            fb.emplace_back(t, lb);
        }
        MonotoneArm a;
        a.states.push_back({fa.r, 1, PiecewiseLinearMonotone(std::move(fg))});
        a.states.push_back({0.0, 1, PiecewiseLinearMonotone(std::move(fb))});
        a.q = {{0.0, 1.0}, {1.0, 0.0}};
        out.arms.push_back(std::move(a));
    }
    return out;
}

}  // namespace rb
