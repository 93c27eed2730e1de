#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rb/core.hpp"
#include "rb/feedback.hpp"

namespace rb {

struct SimConfig {
    std::int64_t horizon = 100000;
    std::int64_t burnin = 1000;
    int reps = 10;
    std::uint64_t seed = 1;
    void validate() const;
};

struct SimResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::vector<double> rep_means;
    std::vector<double> play_rate;  // per arm / machine, plays per measured step
    std::int64_t probes = 0;
    std::int64_t switches = 0;
    std::int64_t repairs = 0;
    double switch_cost_paid = 0.0;
    std::string crediting;          // reward crediting convention
};

// Per-replication random stream: mt19937_64 seeded from (master seed, replication).
class Rng {
public:
    Rng(std::uint64_t master, std::uint64_t rep);
    double uniform();  // [0,1), 53-bit
    bool bernoulli(double p) { return uniform() < p; }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

SimResult finalize(std::vector<double> rep_means, std::vector<double> play_sum, double measured_steps);

// Feedback policies are stateless maps from joint beliefs to an arm (-1 idles).
using FeedbackPolicy = std::function<int(const std::vector<BeliefState>&)>;

FeedbackPolicy make_balanced_policy(const FeedbackPolicyParams& params);
FeedbackPolicy make_myopic_policy(const std::vector<FeedbackArm>& arms);
FeedbackPolicy make_always_play_policy(int arm);
FeedbackPolicy make_fixed_wait_policy(std::int64_t t);  // single arm P(t)
// exploit an arm just observed g, otherwise play the subset arm observed longest ago
FeedbackPolicy make_round_robin_policy(std::vector<int> subset);

// Three-arm policy (arm 0 deterministic): exploit a stochastic arm last seen g; else play arm 0 when
// (k1, k2) lies in the region; else play the stochastic arm observed longer ago (arm 2 on ties).
FeedbackPolicy make_region_policy(std::function<bool(std::int64_t, std::int64_t)> in_region);

SimResult simulate(const FeedbackInstance& inst, const FeedbackPolicy& policy, const SimConfig& cfg);

// per-arm belief cap: min(T_cap, smallest t with nu^t <= 1e-13)
std::int64_t belief_cap(const FeedbackArm& arm, std::int64_t T_cap);

struct ExactOptions {
    std::int64_t T_cap = 100;
    std::size_t max_states = 10000000;
    double tol = 1e-12;
    int max_iterations = 2000000;
};

// Long-run average reward of the policy's induced chain on capped beliefs, started from all arms (b,1).
double exact_policy_eval(const FeedbackInstance& inst, const FeedbackPolicy& policy, const ExactOptions& opt = {});

struct ViResult {
    // optimal action for each joint capped belief, indexed by an encoding of the state
    std::function<int(const std::vector<BeliefState>&)> policy;
    double average_reward = 0.0;
    int sweeps = 0;
};

ViResult vi_optimal(const FeedbackInstance& inst, double gamma = 0.99, std::int64_t T_cap = 100, double tol = 1e-10,
                    int max_sweeps = 100000, std::size_t max_states = 10000000);

struct DriftReport {
    double min_drift = 0.0;
    std::string witness;
    std::size_t states = 0;
    double bound = 0.0;  // the value the drift is compared against
};

// Exact one-step drift of reward plus potential for BalancedIndex at every reachable capped state.
DriftReport feedback_lyapunov_check(const FeedbackInstance& inst, const FeedbackPolicyParams& params,
                                    std::size_t max_states = 2000000);

}  // namespace rb
