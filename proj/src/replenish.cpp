#include "rb/replenish.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace rb {

namespace {

using SparseRows = std::vector<std::vector<std::pair<int, double>>>;

// Long-run average reward from `start`: stationary law per closed class, weighted by absorption.
double chain_average(const SparseRows& P, const std::vector<double>& reward, int start) {
    const int n = static_cast<int>(P.size());
    // Tarjan, iterative
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<char> on(n, 0);
    int counter = 0, ncomp = 0;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        std::vector<std::pair<int, std::size_t>> work{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on[root] = 1;
        while (!work.empty()) {
            auto& [v, k] = work.back();
            if (k < P[v].size()) {
                int w = P[v][k++].first;
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = 1;
                    work.emplace_back(w, 0);
                } else if (on[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[w] = 0;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
            int done = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
        }
    }
    std::vector<char> closed(ncomp, 1);
    for (int v = 0; v < n; ++v)
        for (auto [w, p] : P[v])
            if (p > 0.0 && comp[w] != comp[v]) closed[comp[v]] = 0;
    std::vector<double> rate(ncomp, 0.0);
    for (int c = 0; c < ncomp; ++c) {
        if (!closed[c]) continue;
        std::vector<int> mem;
        std::vector<int> pos(n, -1);
        for (int v = 0; v < n; ++v)
            if (comp[v] == c) { pos[v] = static_cast<int>(mem.size()); mem.push_back(v); }
        const int m = static_cast<int>(mem.size());
        Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(m, m);
        for (int a = 0; a < m; ++a)
            for (auto [w, p] : P[mem[a]]) A(pos[w], a) += p;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        A.row(m - 1).setOnes();
        rhs(m - 1) = 1.0;
        Eigen::VectorXd pi = A.partialPivLu().solve(rhs);
        for (int a = 0; a < m; ++a) rate[c] += pi(a) * reward[mem[a]];
    }
    if (closed[comp[start]]) return rate[comp[start]];
    std::vector<int> tr, pos(n, -1);
    for (int v = 0; v < n; ++v)
        if (!closed[comp[v]]) { pos[v] = static_cast<int>(tr.size()); tr.push_back(v); }
    const int m = static_cast<int>(tr.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (int a = 0; a < m; ++a)
        for (auto [w, p] : P[tr[a]]) {
            if (pos[w] >= 0) A(a, pos[w]) -= p;
            else b(a) += p * rate[comp[w]];
        }
    Eigen::VectorXd val = A.partialPivLu().solve(b);
    return val(pos[start]);
}

// Per machine digit: active state u, K = queued, K + 1 = under repair.
struct Codec {
    std::vector<std::uint64_t> radix;
    explicit Codec(const ReplenishInstance& inst) {
        std::uint64_t mult = 1;
        for (const auto& m : inst.machines) {
            radix.push_back(mult);
            std::uint64_t base = m.size() + 2;
            if (mult > std::numeric_limits<std::uint64_t>::max() / base)
                throw Error(ErrorKind::StateSpaceTooLarge, "joint machine space does not fit a 64-bit code");
            mult *= base;
        }
    }
    std::uint64_t encode(const ReplenishInstance& inst, const ReplenishState& st) const {
        std::uint64_t c = 0;
        for (std::size_t i = 0; i < st.u.size(); ++i) {
            std::uint64_t K = inst.machines[i].size();
            std::uint64_t d = st.u[i] >= 0 ? static_cast<std::uint64_t>(st.u[i]) : K + (st.serving[i] ? 1 : 0);
            c += d * radix[i];
        }
        return c;
    }
};

void check_decision(const ReplenishInstance& inst, const ReplenishState& st, const ReplenishDecision& d) {
    const std::size_t n = inst.machines.size();
    std::vector<char> queued(n, 0), served(n, 0);
    for (std::size_t i = 0; i < n; ++i) queued[i] = st.u[i] < 0;
    for (int i : d.admit) {
        if (i < 0 || static_cast<std::size_t>(i) >= n || queued[i])
            throw Error(ErrorKind::ShapeMismatch, "policy admitted a machine that is not running");
        queued[i] = 1;
    }
    if (d.serve.size() > static_cast<std::size_t>(inst.M))
        throw Error(ErrorKind::ShapeMismatch, "policy serves more than M machines");
    for (int i : d.serve) {
        if (i < 0 || static_cast<std::size_t>(i) >= n || !queued[i] || served[i])
            throw Error(ErrorKind::ShapeMismatch, "policy serves a machine outside the queue");
        served[i] = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (st.serving[i] && !served[i]) throw Error(ErrorKind::ShapeMismatch, "policy preempted a repair");
}

struct StepOutcome {
    double value = 0.0;  // reward minus repair cost
    std::vector<std::pair<ReplenishState, double>> next;
};

StepOutcome step_distribution(const ReplenishInstance& inst, const ReplenishState& st, const ReplenishDecision& d) {
    const std::size_t n = inst.machines.size();
    std::vector<char> admitted(n, 0), served(n, 0);
    for (int i : d.admit) admitted[i] = 1;
    for (int i : d.serve) served[i] = 1;
    StepOutcome out;
    // per-machine marginal outcomes: (u, serving, prob)
    std::vector<std::vector<std::tuple<int, char, double>>> opts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Machine& m = inst.machines[i];
        if (admitted[i]) out.value -= m.repair_cost[st.u[i]];
        if (st.u[i] >= 0 && !admitted[i]) {
            out.value += m.reward[st.u[i]];
            for (std::size_t v = 0; v < m.size(); ++v)
                if (m.p[st.u[i]][v] > 0.0) opts[i].emplace_back(static_cast<int>(v), 0, m.p[st.u[i]][v]);
        } else if (served[i]) {
            opts[i].emplace_back(m.rho, 0, m.s);
            if (m.s < 1.0) opts[i].emplace_back(-1, 1, 1.0 - m.s);
        } else {
            opts[i].emplace_back(-1, 0, 1.0);
        }
    }
    ReplenishState cur;
    cur.u.assign(n, 0);
    cur.serving.assign(n, 0);
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double pr) {
        if (i == n) {
            out.next.emplace_back(cur, pr);
            return;
        }
        for (auto [u, s, p] : opts[i]) {
            cur.u[i] = u;
            cur.serving[i] = s;
            rec(i + 1, pr * p);
        }
    };
    rec(0, 1.0);
    return out;
}

template <class Visit>
void enumerate_reachable(const ReplenishInstance& inst, const ReplenishPolicy& policy, std::size_t max_states,
                         Visit&& visit) {
    Codec cd(inst);
    std::unordered_map<std::uint64_t, int> id;
    std::vector<ReplenishState> states{initial_replenish_state(inst)};
    id.emplace(cd.encode(inst, states[0]), 0);
    for (std::size_t k = 0; k < states.size(); ++k) {
        ReplenishState st = states[k];
        ReplenishDecision d = policy(st);
        check_decision(inst, st, d);
        StepOutcome so = step_distribution(inst, st, d);
        std::vector<std::pair<int, double>> row;
        for (auto& [nx, p] : so.next) {
            auto [it, fresh] = id.emplace(cd.encode(inst, nx), static_cast<int>(states.size()));
            if (fresh) {
                if (states.size() >= max_states)
                    throw Error(ErrorKind::StateSpaceTooLarge, "reachable joint machine space exceeds the state limit");
                states.push_back(nx);
            }
            row.emplace_back(it->second, p);
        }
        visit(static_cast<int>(k), st, d, so, std::move(row));
    }
}

}  // namespace

ReplenishLp build_replenish_lp(const ReplenishInstance& inst, bool balanced) {
    inst.validate();
    ReplenishLp lp;
    LpModel& m = lp.model;
    m.sense = Sense::Max;
    const std::size_t n = inst.machines.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Machine& mc = inst.machines[i];
        const std::string tag = "_" + std::to_string(i) + "_";
        lp.x.emplace_back();
        lp.z.emplace_back();
        for (std::size_t u = 0; u < mc.size(); ++u) {
            lp.x[i].push_back(m.add_var(mc.reward[u], 0.0, kInf, "x" + tag + std::to_string(u)));
            // repairing straight from the initial state is pointless
            lp.z[i].push_back(static_cast<int>(u) == mc.rho
                                  ? -1
                                  : m.add_var(-mc.repair_cost[u], 0.0, kInf, "z" + tag + std::to_string(u)));
        }
        lp.xk.push_back(m.add_var(0.0, 0.0, kInf, "xk_" + std::to_string(i)));
    }
    if (balanced) lp.omega = m.add_var(0.0, -kInf, kInf, "omega");
    const double M = static_cast<double>(inst.M);
    std::vector<std::pair<int, double>> budget;
    for (int k : lp.xk) budget.emplace_back(k, 1.0);
    if (balanced) budget.emplace_back(lp.omega, -M);
    lp.budget_row = m.add_row(std::move(budget), Rel::Le, M, "budget");
    for (std::size_t i = 0; i < n; ++i) {
        const Machine& mc = inst.machines[i];
        const std::size_t K = mc.size();
        std::vector<std::pair<int, double>> occ{{lp.xk[i], 1.0}};
        for (int x : lp.x[i]) occ.emplace_back(x, 1.0);
        if (balanced) occ.emplace_back(lp.omega, 1.0);
        lp.occupancy_row.push_back(m.add_row(std::move(occ), Rel::Le, 1.0, "occ_" + std::to_string(i)));
        lp.flow_row.emplace_back();
        // outflow + repairs - inflow = 0; the repair queue feeds rho
        for (std::size_t u = 0; u < K; ++u) {
            std::vector<std::pair<int, double>> row;
            double out = 0.0;
            for (std::size_t v = 0; v < K; ++v)
                if (v != u) out += mc.p[u][v];
            if (out != 0.0) row.emplace_back(lp.x[i][u], out);
            for (std::size_t v = 0; v < K; ++v)
                if (v != u && mc.p[v][u] != 0.0) row.emplace_back(lp.x[i][v], -mc.p[v][u]);
            if (lp.z[i][u] >= 0) row.emplace_back(lp.z[i][u], 1.0);
            if (static_cast<int>(u) == mc.rho) row.emplace_back(lp.xk[i], -mc.s);
            lp.flow_row[i].push_back(
                m.add_row(std::move(row), Rel::Eq, 0.0, "flow_" + std::to_string(i) + "_" + std::to_string(u)));
        }
    }
    return lp;
}

double replenish_lp_value(const ReplenishInstance& inst) {
    ReplenishLp lp = build_replenish_lp(inst, false);
    LpSolution s = lp_solve(lp.model);
    require_optimal(s, "replenishment LP");
    return s.objective;
}

ReplenishParams solve_replenish(const ReplenishInstance& inst, const ReplenishTolerances& tol) {
    ReplenishLp lp = build_replenish_lp(inst, true);
    LpSolution s = lp_solve(lp.model);
    require_optimal(s, "balanced replenishment LP");
    ReplenishParams out;
    out.M = inst.M;
    out.lambda = s.dual[lp.budget_row];
    out.objective = s.objective;
    const std::size_t n = inst.machines.size();
    out.machines.resize(n);
    double cs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Machine& mc = inst.machines[i];
        const std::size_t K = mc.size();
        MachineParams& mp = out.machines[i];
        mp.h = s.dual[lp.occupancy_row[i]];
        mp.active = mp.h > tol.h;
        out.sum_h += mp.h;
        mp.x_kappa = s.x[lp.xk[i]];
        for (std::size_t u = 0; u < K; ++u) {
            mp.phi.push_back(s.dual[lp.flow_row[i][u]]);
            mp.x.push_back(s.x[lp.x[i][u]]);
            mp.z.push_back(lp.z[i][u] >= 0 ? s.x[lp.z[i][u]] : 0.0);
            mp.trigger.push_back(mp.z[u] > tol.z);
        }
        for (std::size_t u = 0; u < K; ++u) {
            if (mp.trigger[u]) cs = std::max(cs, std::abs(mp.phi[u] + mc.repair_cost[u]));
            if (mp.x[u] > tol.z) {
                double g = mc.reward[u];
                for (std::size_t v = 0; v < K; ++v) g += mc.p[u][v] * (mp.phi[v] - mp.phi[u]);
                cs = std::max(cs, std::abs(mp.h - g));
            }
        }
        if (mp.x_kappa > tol.z) cs = std::max(cs, std::abs(out.lambda + mp.h - mc.s * mp.phi[mc.rho]));
    }
    out.cs_residual = cs;
    out.balance_residual = std::abs(static_cast<double>(inst.M) * out.lambda - out.sum_h);
    return out;
}

ReplenishState initial_replenish_state(const ReplenishInstance& inst) {
    ReplenishState st;
    for (const auto& m : inst.machines) st.u.push_back(m.rho);
    st.serving.assign(inst.machines.size(), 0);
    return st;
}

ReplenishDecision replenish_policy_next(const ReplenishParams& params, const ReplenishInstance& inst,
                                        const ReplenishState& st) {
    const std::size_t n = inst.machines.size();
    ReplenishDecision d;
    std::vector<char> queued(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        queued[i] = st.u[i] < 0;
        const auto& mp = params.machines[i];
        if (st.u[i] >= 0 && mp.active && mp.trigger[st.u[i]]) {
            d.admit.push_back(static_cast<int>(i));
            queued[i] = 1;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (st.serving[i]) d.serve.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < n && d.serve.size() < static_cast<std::size_t>(inst.M); ++i)
        if (queued[i] && !st.serving[i]) d.serve.push_back(static_cast<int>(i));
    std::sort(d.serve.begin(), d.serve.end());
    return d;
}

std::vector<double> whittle_replenish_indices(const ReplenishInstance& inst) {
    std::vector<double> eta;
    for (std::size_t i = 0; i < inst.machines.size(); ++i) {
        const Machine& m = inst.machines[i];
        if (m.size() != 2)
            throw Error(ErrorKind::UnsupportedShape,
                        "machine " + std::to_string(i) + ": the repair index is only known for two-state machines");
        const int good = m.rho, bad = 1 - m.rho;
        const double p = m.p[good][bad];
        eta.push_back(p > 0.0 ? m.s * m.reward[good] / p : 0.0);
    }
    return eta;
}

ReplenishDecision whittle_replenish_next(const ReplenishInstance& inst, const ReplenishState& st) {
    std::vector<double> eta = whittle_replenish_indices(inst);
    const std::size_t n = inst.machines.size();
    ReplenishDecision d;
    std::size_t busy = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (st.serving[i]) { d.serve.push_back(static_cast<int>(i)); ++busy; }
    // broken machines waiting, by index (the good state's index is negative)
    std::vector<int> cand;
    for (std::size_t i = 0; i < n; ++i)
        if ((st.u[i] >= 0 && st.u[i] != inst.machines[i].rho && eta[i] > 0.0) || (st.u[i] < 0 && !st.serving[i]))
            cand.push_back(static_cast<int>(i));
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return eta[a] > eta[b]; });
    for (int i : cand) {
        if (busy >= static_cast<std::size_t>(inst.M)) break;
        if (st.u[i] >= 0) d.admit.push_back(i);
        d.serve.push_back(i);
        ++busy;
    }
    std::sort(d.serve.begin(), d.serve.end());
    return d;
}

ReplenishPolicy make_replenish_policy(const ReplenishParams& params, const ReplenishInstance& inst) {
    return [params, inst](const ReplenishState& st) { return replenish_policy_next(params, inst, st); };
}

ReplenishPolicy make_whittle_replenish_policy(const ReplenishInstance& inst) {
    whittle_replenish_indices(inst);
    return [inst](const ReplenishState& st) { return whittle_replenish_next(inst, st); };
}

SimResult simulate_replenish(const ReplenishInstance& inst, const ReplenishPolicy& policy, const SimConfig& cfg,
                             const ReplenishParams* params) {
    cfg.validate();
    inst.validate();
    const std::size_t n = inst.machines.size();
    std::vector<char> checked(n, 0);
    if (params) {
        if (params->machines.size() != n) throw Error(ErrorKind::ShapeMismatch, "parameters do not match the instance");
        for (std::size_t i = 0; i < n; ++i) {
            const auto& mp = params->machines[i];
            checked[i] = mp.active && std::any_of(mp.trigger.begin(), mp.trigger.end(), [](char c) { return c; });
        }
    }
    std::vector<double> rep_means, repairing(n, 0.0);
    std::int64_t admissions = 0;
    for (int rep = 0; rep < cfg.reps; ++rep) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(rep));
        ReplenishState st = initial_replenish_state(inst);
        double total = 0.0;
        for (std::int64_t k = 0; k < cfg.horizon; ++k) {
            const bool measured = k >= cfg.burnin;
            for (std::size_t i = 0; i < n; ++i) {
                if (!checked[i] || st.u[i] < 0) continue;
                const auto& mp = params->machines[i];
                if (mp.x[st.u[i]] + mp.z[st.u[i]] <= 1e-8)
                    throw Error(ErrorKind::NumericFailure, "machine " + std::to_string(i) + " reached state " +
                                                               std::to_string(st.u[i]) + " outside the LP support");
            }
            ReplenishDecision d = policy(st);
            check_decision(inst, st, d);
            std::vector<char> admitted(n, 0), served(n, 0);
            double net = 0.0;
            for (int i : d.admit) {
                admitted[i] = 1;
                net -= inst.machines[i].repair_cost[st.u[i]];
            }
            for (int i : d.serve) served[i] = 1;
            for (std::size_t i = 0; i < n; ++i)
                if (st.u[i] >= 0 && !admitted[i]) net += inst.machines[i].reward[st.u[i]];
            if (measured) {
                total += net;
                admissions += static_cast<std::int64_t>(d.admit.size());
                for (int i : d.serve) repairing[i] += 1.0;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const Machine& m = inst.machines[i];
                double x = rng.uniform();
                if (st.u[i] >= 0 && !admitted[i]) {
                    const auto& row = m.p[st.u[i]];
                    std::size_t v = 0;
                    double acc = row[0];
                    while (x >= acc && v + 1 < row.size()) acc += row[++v];
                    st.u[i] = static_cast<int>(v);
                    st.serving[i] = 0;
                } else if (served[i]) {
                    if (x < m.s) {
                        st.u[i] = m.rho;
                        st.serving[i] = 0;
                    } else {
                        st.u[i] = -1;
                        st.serving[i] = 1;
                    }
                } else {
                    st.u[i] = -1;
                    st.serving[i] = 0;
                }
            }
        }
        rep_means.push_back(total / static_cast<double>(cfg.horizon - cfg.burnin));
    }
    SimResult out =
        finalize(std::move(rep_means), std::move(repairing), static_cast<double>(cfg.horizon - cfg.burnin));
    out.repairs = admissions;
    out.crediting = "current-state";
    return out;
}

double exact_replenish_eval(const ReplenishInstance& inst, const ReplenishPolicy& policy, std::size_t max_states) {
    inst.validate();
    SparseRows P;
    std::vector<double> value;
    enumerate_reachable(inst, policy, max_states,
                        [&](int, const ReplenishState&, const ReplenishDecision&, const StepOutcome& so,
                            std::vector<std::pair<int, double>> row) {
                            P.push_back(std::move(row));
                            value.push_back(so.value);
                        });
    return chain_average(P, value, 0);
}

ReplenishDriftReport replenish_lyapunov_check(const ReplenishInstance& inst, const ReplenishParams& params,
                                              std::size_t max_states) {
    ReplenishDriftReport rep;
    rep.bound = 0.5 * replenish_lp_value(inst);
    rep.lambda_bound = static_cast<double>(inst.M) * params.lambda;
    const std::size_t n = inst.machines.size();
    auto potential = [&](const ReplenishState& s) {
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (params.machines[i].active && s.u[i] >= 0) v += params.machines[i].phi[s.u[i]];
        return v;
    };
    ReplenishPolicy pol = make_replenish_policy(params, inst);
    enumerate_reachable(inst, pol, max_states,
                        [&](int, const ReplenishState& st, const ReplenishDecision&, const StepOutcome& so,
                            std::vector<std::pair<int, double>>) {
                            ++rep.states;
                            for (std::size_t i = 0; i < n; ++i) {
                                const auto& mp = params.machines[i];
                                if (mp.active && st.u[i] >= 0 && mp.x[st.u[i]] <= 1e-8 && mp.z[st.u[i]] <= 1e-8) {
                                    ++rep.transient_states;
                                    return;
                                }
                            }
                            double drift = so.value - potential(st);
                            for (const auto& [nx, p] : so.next) drift += p * potential(nx);
                            if (drift < rep.min_drift) {
                                rep.min_drift = drift;
                                std::ostringstream os;
                                for (std::size_t i = 0; i < n; ++i)
                                    os << (i ? " " : "")
                                       << (st.u[i] >= 0 ? std::to_string(st.u[i]) : (st.serving[i] ? "R" : "Q"));
                                rep.witness = os.str();
                            }
                        });
    return rep;
}

}  // namespace rb
