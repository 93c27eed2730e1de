#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rb {

enum class ErrorKind {
    InvalidInput,
    ParameterOutOfRange,
    VariantMismatch,
    ShapeMismatch,
    UnsupportedShape,
    Infeasible,
    Unbounded,
    NumericFailure,
    DegenerateArm,
    AllArmsInactive,
    NoTightConstraint,
    MissingSupport,
    StateSpaceTooLarge,
    NoConvergence,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }
    // Input errors map to exit code 2 in the CLI, everything else to 3.
    bool is_input_error() const;

private:
    ErrorKind kind_;
};

constexpr double kDefaultDelta = 1e-6;

// (1-a-b)^t with t possibly huge; tiny results clamp to zero.
double pow_nu(double nu, std::int64_t t);

struct FeedbackArm {
    double alpha = 0.0;
    double beta = 0.0;
    double r = 0.0;

    FeedbackArm() = default;
    FeedbackArm(double alpha, double beta, double r, double delta = kDefaultDelta);

    double nu() const { return 1.0 - alpha - beta; }
    double stationary() const { return alpha / (alpha + beta); }
};

enum class Obs : std::uint8_t { g = 0, b = 1 };

struct BeliefState {
    Obs last = Obs::b;
    std::int64_t t = 1;
};

// Probability the arm is in g now, given it was last seen in b (v) or g (u) t steps ago.
double belief_v(const FeedbackArm& arm, std::int64_t t);
double belief_u(const FeedbackArm& arm, std::int64_t t);
double belief_g(const FeedbackArm& arm, const BeliefState& s);

class PiecewiseLinearMonotone {
public:
    PiecewiseLinearMonotone() = default;
    explicit PiecewiseLinearMonotone(std::vector<std::pair<std::int64_t, double>> breakpoints);

    double operator()(std::int64_t t) const;
    const std::vector<std::pair<std::int64_t, double>>& breakpoints() const { return bp_; }
    std::int64_t last_t() const { return bp_.back().first; }

private:
    std::vector<std::pair<std::int64_t, double>> bp_{{1, 0.0}};
};

double pwl_eval(const PiecewiseLinearMonotone& f, std::int64_t t);

struct MonotoneState {
    double r = 0.0;
    std::int64_t duration = 1;
    PiecewiseLinearMonotone f;
};

struct MonotoneArm {
    std::vector<MonotoneState> states;
    std::vector<std::vector<double>> q;  // q[k][j], zero diagonal

    std::size_t size() const { return states.size(); }
    // Throws InvalidInput on shape, probability, or connectivity violations.
    void validate() const;
};

struct MonotoneInstance {
    std::vector<MonotoneArm> arms;
    int M = 1;
    std::vector<double> switch_out;  // c_i
    std::vector<double> switch_in;   // s_i

    bool has_switching() const;
    bool has_durations() const;
    void validate() const;
};

struct ProbeArm {
    FeedbackArm arm;
    double cost = 0.0;
};

struct ProbeInstance {
    std::vector<ProbeArm> arms;
    int M = 1;
    void validate() const;
};

struct Machine {
    std::vector<double> reward;                 // r_u
    std::vector<double> repair_cost;            // c_u
    std::vector<std::vector<double>> p;         // row stochastic
    double s = 1.0;                             // repair completion probability
    int rho = 0;                                // state after repair

    std::size_t size() const { return reward.size(); }
};

struct ReplenishInstance {
    std::vector<Machine> machines;
    int M = 1;
    void validate() const;
};

struct FeedbackInstance {
    std::vector<FeedbackArm> arms;
    double delta = kDefaultDelta;
    int M = 1;
};

// Per-arm truncation: smallest T with nu^T <= tol, clamped to [1, cap].
std::int64_t mixing_horizon(const FeedbackArm& arm, double tol = 1e-9, std::int64_t cap = 100000);

}  // namespace rb
