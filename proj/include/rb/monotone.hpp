#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rb/core.hpp"
#include "rb/lp.hpp"
#include "rb/sim.hpp"

namespace rb {

enum class MonotoneVariant { Base, Multiplay, Switching };

const char* variant_name(MonotoneVariant v);
MonotoneVariant parse_variant(const std::string& s);

// Smallest variant that can represent the instance.
MonotoneVariant natural_variant(const MonotoneInstance& inst);

// Throws VariantMismatch when the instance uses features the variant cannot express.
void check_variant(const MonotoneInstance& inst, MonotoneVariant v);

struct BalanceRowTag {
    int arm = 0;
    int state = 0;
    std::int64_t t = 1;
    int family = 0;  // switching: 0 pays c+s (switch in), 1 stays on the arm
};

struct BalanceLp {
    LpModel model;
    MonotoneVariant variant = MonotoneVariant::Base;
    bool balanced = true;
    int lambda = -1;
    std::vector<int> h;
    std::vector<std::vector<int>> p;  // p[i][0] is pinned to 0
    std::vector<BalanceRowTag> tags;  // one per structural row, in row order
    int balance_row = -1;
};

// balanced = false drops the balance row, which leaves the dual of the truncated Whittle LP.
BalanceLp build_balance_lp(const MonotoneInstance& inst, MonotoneVariant v, bool balanced = true);

// Primal relaxation with x variables at t in the breakpoint sets.
LpModel build_whittle_lp(const MonotoneInstance& inst, MonotoneVariant v);
double whittle_lp_value(const MonotoneInstance& inst, MonotoneVariant v);

// Long-run reward per step of playing the arm back to back from state 0.
double always_play_rate(const MonotoneArm& arm);

struct MonotoneArmParams {
    double h = 0.0;
    bool active = false;  // h > tol_h
    bool u1 = false;      // continuous play certified
    double play_rate = 0.0;
    std::vector<double> p;
    std::vector<double> dP;
    std::vector<std::int64_t> t;  // tight time per state
    std::vector<char> good;       // 1 for G, 0 for I
};

struct BalanceSolution {
    MonotoneVariant variant = MonotoneVariant::Base;
    int M = 1;
    double lambda = 0.0;
    double objective = 0.0;
    double sum_h = 0.0;
    double balance_residual = 0.0;
    double primal_residual = 0.0;
    double cs_residual = 0.0;
    std::vector<double> switch_cost;  // c_i + s_i
    std::vector<MonotoneArmParams> arms;
};

struct ExtractTolerances {
    double h = 1e-7;
    double tight = 1e-6;  // scaled by 1 + |rhs|
    double cs = 1e-8;
};

BalanceSolution extract_policy_params(const MonotoneInstance& inst, const BalanceLp& lp, const LpSolution& sol,
                                      const ExtractTolerances& tol = {});

BalanceSolution solve_balance(const MonotoneInstance& inst, MonotoneVariant v);

struct MonotonePolicyState {
    std::vector<int> k;
    std::vector<std::int64_t> y;     // steps since the arm entered its state or last finished a play
    std::vector<std::int64_t> lock;  // remaining steps of a play in progress, 0 when free
    int current = -1;                // switching: arm the player sits on
};

MonotonePolicyState initial_policy_state(const MonotoneInstance& inst);

// Arms whose play starts this step.
std::vector<int> monotone_index_next(const BalanceSolution& sol, const MonotoneInstance& inst,
                                     const MonotonePolicyState& st);

// Called every step, burn-in included, with the arms started, the gross reward and the switching cost charged.
using MonotoneObserver =
    std::function<void(int rep, std::int64_t step, const std::vector<int>& plays, double reward, double cost)>;

SimResult simulate_monotone(const MonotoneInstance& inst, const BalanceSolution& sol, const SimConfig& cfg,
                            const MonotoneObserver& observer = {});

struct MonotoneDriftReport {
    double min_drift = 0.0;
    double min_play = 0.0;  // min over states where something is played
    double min_idle = 0.0;  // min over idle states
    std::string witness;
    std::size_t states = 0;
    std::size_t transient_states = 0;  // start-up states with a waiting G arm, not scored
    double bound = 0.0;                // lambda
};

// Exact one-step drift of reward plus potential over every reachable capped state (base variant).
MonotoneDriftReport monotone_lyapunov_check(const MonotoneInstance& inst, const BalanceSolution& sol,
                                            std::size_t max_states = 2000000);

// Per (arm, state, y >= t) worst margin of amortized reward plus potential change over the
// per-play target; nonnegative up to roundoff when the parameters certify the bound.
double monotone_amortized_margin(const MonotoneInstance& inst, const BalanceSolution& sol);

// Two-state encoding of feedback arms: g = 0, b = 1, f_g = 1 - u_t, f_b = v_t at t = 1..T.
// T <= 0 uses each arm's mixing horizon.
MonotoneInstance encode_feedback(const FeedbackInstance& inst, std::int64_t T = 0);

}  // namespace rb
