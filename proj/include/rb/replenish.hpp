#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rb/core.hpp"
#include "rb/lp.hpp"
#include "rb/sim.hpp"

namespace rb {

struct ReplenishLp {
    LpModel model;  // maximisation
    std::vector<std::vector<int>> x, z;  // z[i][rho_i] = -1
    std::vector<int> xk;                 // repair-queue occupancy
    int omega = -1;
    int budget_row = -1;
    std::vector<int> occupancy_row;
    std::vector<std::vector<int>> flow_row;
};

// balanced = false gives the plain relaxation whose value bounds every policy.
ReplenishLp build_replenish_lp(const ReplenishInstance& inst, bool balanced = true);
double replenish_lp_value(const ReplenishInstance& inst);

struct MachineParams {
    double h = 0.0;
    bool active = false;
    std::vector<double> phi;  // potential per state; the queue carries 0
    std::vector<double> x, z;
    double x_kappa = 0.0;
    std::vector<char> trigger;  // z_u > tol_z
};

struct ReplenishParams {
    int M = 1;
    double lambda = 0.0;
    double objective = 0.0;
    double sum_h = 0.0;
    double balance_residual = 0.0;
    double cs_residual = 0.0;  // worst of the three slackness identities
    std::vector<MachineParams> machines;
};

struct ReplenishTolerances {
    double h = 1e-9;
    double z = 1e-8;
};

ReplenishParams solve_replenish(const ReplenishInstance& inst, const ReplenishTolerances& tol = {});

// State at the start of a step.
struct ReplenishState {
    std::vector<int> u;         // active state, -1 while in the repair queue
    std::vector<char> serving;  // in the queue and already under repair
};

struct ReplenishDecision {
    std::vector<int> admit;  // moved to the queue now, paying c_u
    std::vector<int> serve;  // full service set for this step, at most M
};

using ReplenishPolicy = std::function<ReplenishDecision(const ReplenishState&)>;

ReplenishState initial_replenish_state(const ReplenishInstance& inst);

ReplenishDecision replenish_policy_next(const ReplenishParams& params, const ReplenishInstance& inst,
                                        const ReplenishState& st);

// eta_i = s_i r_i / p_i for two-state machines; throws UnsupportedShape otherwise.
std::vector<double> whittle_replenish_indices(const ReplenishInstance& inst);
ReplenishDecision whittle_replenish_next(const ReplenishInstance& inst, const ReplenishState& st);

ReplenishPolicy make_replenish_policy(const ReplenishParams& params, const ReplenishInstance& inst);
ReplenishPolicy make_whittle_replenish_policy(const ReplenishInstance& inst);

// When params is given, machines that ever trigger a repair must stay on states with x + z > tol_z.
SimResult simulate_replenish(const ReplenishInstance& inst, const ReplenishPolicy& policy, const SimConfig& cfg,
                             const ReplenishParams* params = nullptr);

// Stationary average of reward minus repair cost on the reachable joint chain, started from every machine at rho.
double exact_replenish_eval(const ReplenishInstance& inst, const ReplenishPolicy& policy,
                            std::size_t max_states = 4000);

struct ReplenishDriftReport {
    double min_drift = kInf;
    std::string witness;
    std::size_t states = 0;
    std::size_t transient_states = 0;  // a free machine sits where x_u = z_u = 0
    double bound = 0.0;                // half the plain LP value
    double lambda_bound = 0.0;         // M lambda
};

ReplenishDriftReport replenish_lyapunov_check(const ReplenishInstance& inst, const ReplenishParams& params,
                                              std::size_t max_states = 200000);

}  // namespace rb
