#pragma once

#include <cstdint>
#include <vector>

#include "rb/core.hpp"
#include "rb/lp.hpp"
#include "rb/sim.hpp"

namespace rb {

struct ProbeLp {
    LpModel model;  // maximisation over x, z and the balance multiplier omega
    std::vector<std::int64_t> T;
    std::vector<int> xg, xb, zg, zb;  // first column of each block, t = 1..T[i]
    int omega = -1;
    int budget_row = -1;
    std::vector<int> occupancy_row, flow_row;
};

// Truncated primal with the balance row folded in through omega; T[i] <= 0 uses the mixing horizon.
ProbeLp build_probe_lp(const ProbeInstance& inst, std::vector<std::int64_t> T, bool balanced = true);

struct ProbeArmParams {
    double h = 0.0;
    double p = 0.0;
    bool active = false;
    std::int64_t T = 0;
    std::int64_t e = 0, d = 0, m = 0;
    // per-arm normalised occupancies at t = 1..T (index t-1)
    std::vector<double> zg, zb, xg, xb;
    std::vector<double> phi_g, phi_b;
    double identity_d = 0.0;  // residual of the b-probe identity at d
    double identity_e = 0.0;  // residual of the g-probe identity at e
    int retries = 0;
};

struct ProbePolicyParams {
    int M = 1;
    double lambda = 0.0;
    double objective = 0.0;  // M lambda + sum h
    double sum_h = 0.0;
    double balance_residual = 0.0;
    std::vector<ProbeArmParams> arms;
};

struct ProbeOptions {
    double h = 1e-9;
    double z = 1e-8;
    double identity = 1e-6;
    int max_retries = 3;
};

// Single-arm problem at a fixed multiplier: returns h and fills p, z (and T unchanged).
ProbeArmParams probe_arm_at_lambda(const ProbeArm& arm, double lambda, std::int64_t T);

// Balanced multiplier, per-arm supports e, d, m; throws MissingSupport or NumericFailure.
// T gives starting truncations (<= 0 or missing: mixing horizon), doubled while 4 max(d, e) > T, at most max_retries times.
ProbePolicyParams solve_probe(const ProbeInstance& inst, const ProbeOptions& tol = {},
                              std::vector<std::int64_t> T = {});

// Fills e, d, m and the identity residuals of one arm already solved at lambda.
void extract_probe_params(const ProbeArm& arm, double lambda, ProbeArmParams& a, const ProbeOptions& tol = {});

// min over lambda of M lambda + sum h(lambda): the unbalanced truncated LP value.
double probe_lp_value(const ProbeInstance& inst, std::vector<std::int64_t> T = {});

enum class ProbeStage : std::uint8_t { None = 0, First = 1, Second = 2 };

struct ProbeArmState {
    Obs last = Obs::b;
    std::int64_t t = 1;  // steps since the last observation
    ProbeStage stage = ProbeStage::None;
    std::int64_t left = 0;  // plays remaining before the stage's probe
};

struct ProbeAction {
    std::vector<int> plays;
    std::vector<int> probes;  // probed at the end of this step
};

// Admits arms into stages (mutating st) and reports this step's plays and probes.
ProbeAction probe_policy_next(const ProbePolicyParams& params, std::vector<ProbeArmState>& st);

// Applies the end-of-step bookkeeping: stage counters, probe outcomes, belief clocks.
void probe_policy_advance(const ProbePolicyParams& params, std::vector<ProbeArmState>& st,
                          const ProbeAction& act, const std::vector<Obs>& probed_state);

// Net reward per step (reward minus probe cost); hidden state starts stationary and is seen at time 0.
SimResult simulate_probe(const ProbeInstance& inst, const ProbePolicyParams& params, const SimConfig& cfg);

struct ProbeDriftReport {
    double stage1_margin = kInf;  // min over active arms of block drift - m (lambda + h)
    double stage2_margin = kInf;  // min over active arms of block drift - e (lambda + h)
    double delayed_stage1_margin = kInf;  // same block started after extra waiting, up to T
    int witness = -1;
};

ProbeDriftReport probe_drift_certificate(const ProbeInstance& inst, const ProbePolicyParams& params);

}  // namespace rb
