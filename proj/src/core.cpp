#include "rb/core.hpp"

#include <cmath>
#include <sstream>

namespace rb {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
        case ErrorKind::VariantMismatch: return "VariantMismatch";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::UnsupportedShape: return "UnsupportedShape";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::Unbounded: return "Unbounded";
        case ErrorKind::NumericFailure: return "NumericFailure";
        case ErrorKind::DegenerateArm: return "DegenerateArm";
        case ErrorKind::AllArmsInactive: return "AllArmsInactive";
        case ErrorKind::NoTightConstraint: return "NoTightConstraint";
        case ErrorKind::MissingSupport: return "MissingSupport";
        case ErrorKind::StateSpaceTooLarge: return "StateSpaceTooLarge";
        case ErrorKind::NoConvergence: return "NoConvergence";
    }
    return "Unknown";
}

bool Error::is_input_error() const {
    switch (kind_) {
        case ErrorKind::InvalidInput:
        case ErrorKind::ParameterOutOfRange:
        case ErrorKind::VariantMismatch:
        case ErrorKind::ShapeMismatch:
        case ErrorKind::UnsupportedShape:
            return true;
        default:
            return false;
    }
}

double pow_nu(double nu, std::int64_t t) {
    if (t <= 0) return 1.0;
    if (nu <= 0.0) return 0.0;
    double v;
    if (t <= 64) {
        v = std::pow(nu, static_cast<double>(t));
    } else {
        v = std::exp(static_cast<double>(t) * std::log(nu));
    }
    return v < 1e-300 ? 0.0 : v;
}

namespace {

// nu^t and 1 - nu^t computed from a+b, accurate when a+b is tiny.
std::pair<double, double> decay(const FeedbackArm& arm, std::int64_t t) {
    double s = arm.alpha + arm.beta;
    double l = std::log1p(-s) * static_cast<double>(t);
    double p = std::exp(l);
    if (p < 1e-300) return {0.0, 1.0};
    return {p, -std::expm1(l)};
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorKind::InvalidInput, msg);
}

}  // namespace

FeedbackArm::FeedbackArm(double a, double b, double rr, double delta) : alpha(a), beta(b), r(rr) {
    require(std::isfinite(a) && std::isfinite(b) && std::isfinite(rr), "non-finite arm parameter");
    require(a > 0.0 && b > 0.0, "alpha and beta must be positive");
    require(delta > 0.0 && a + b <= 1.0 - delta, "alpha + beta exceeds 1 - delta");
    require(rr >= 0.0, "reward must be non-negative");
}

double belief_v(const FeedbackArm& arm, std::int64_t t) {
    auto [p, q] = decay(arm, t);
    (void)p;
    return arm.stationary() * q;
}

double belief_u(const FeedbackArm& arm, std::int64_t t) {
    auto [p, q] = decay(arm, t);
    (void)q;
    double s = arm.alpha + arm.beta;
    return arm.alpha / s + (arm.beta / s) * p;
}

double belief_g(const FeedbackArm& arm, const BeliefState& s) {
    return s.last == Obs::g ? belief_u(arm, s.t) : belief_v(arm, s.t);
}

PiecewiseLinearMonotone::PiecewiseLinearMonotone(std::vector<std::pair<std::int64_t, double>> bp)
    : bp_(std::move(bp)) {
    require(!bp_.empty(), "escape function needs at least one breakpoint");
    require(bp_.front().first == 1, "first breakpoint must be at t = 1");
    for (std::size_t i = 0; i < bp_.size(); ++i) {
        double v = bp_[i].second;
        require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "breakpoint value outside [0,1]");
        if (i > 0) {
            require(bp_[i].first > bp_[i - 1].first, "breakpoint times must strictly increase");
            require(v >= bp_[i - 1].second, "escape function must be non-decreasing");
        }
    }
}

double PiecewiseLinearMonotone::operator()(std::int64_t t) const {
    if (t <= bp_.front().first) return bp_.front().second;
    if (t >= bp_.back().first) return bp_.back().second;
    // first breakpoint strictly after t
    std::size_t lo = 0, hi = bp_.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (bp_[mid].first <= t) lo = mid; else hi = mid;
    }
    auto [t1, f1] = bp_[lo];
    auto [t2, f2] = bp_[hi];
    if (t == t1) return f1;
    double w = static_cast<double>(t - t1) / static_cast<double>(t2 - t1);
    return (1.0 - w) * f1 + w * f2;
}

double pwl_eval(const PiecewiseLinearMonotone& f, std::int64_t t) { return f(t); }

void MonotoneArm::validate() const {
    std::size_t K = states.size();
    require(K >= 1, "arm has no states");
    require(q.size() == K, "q must be K x K");
    for (std::size_t k = 0; k < K; ++k) {
        require(q[k].size() == K, "q must be K x K");
        require(states[k].r >= 0.0 && std::isfinite(states[k].r), "state reward must be >= 0");
        require(states[k].duration >= 1, "duration must be >= 1");
        double row = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            double v = q[k][j];
            require(std::isfinite(v) && v >= 0.0, "q entries must be >= 0");
            if (j == k) require(v == 0.0, "q diagonal must be zero");
            row += v;
        }
        require(row <= 1.0 + 1e-12, "q row sum exceeds 1");
    }
    if (K == 1) return;
    // strong connectivity: every state reaches and is reached from state 0
    auto reach = [&](bool forward) {
        std::vector<char> seen(K, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < K; ++b) {
                double w = forward ? q[a][b] : q[b][a];
                if (w > 0.0 && !seen[b]) { seen[b] = 1; stack.push_back(b); }
            }
        }
        for (char c : seen) if (!c) return false;
        return true;
    };
    require(reach(true) && reach(false), "transition graph of q is not strongly connected");
}

bool MonotoneInstance::has_switching() const {
    for (double c : switch_out) if (c != 0.0) return true;
    for (double s : switch_in) if (s != 0.0) return true;
    return false;
}

bool MonotoneInstance::has_durations() const {
    for (const auto& a : arms)
        for (const auto& s : a.states)
            if (s.duration != 1) return true;
    return false;
}

void MonotoneInstance::validate() const {
    require(!arms.empty(), "instance has no arms");
    require(M >= 1, "M must be >= 1");
    for (const auto& a : arms) a.validate();
    require(switch_out.empty() || switch_out.size() == arms.size(), "switch_out length mismatch");
    require(switch_in.empty() || switch_in.size() == arms.size(), "switch_in length mismatch");
    for (double c : switch_out) require(c >= 0.0 && std::isfinite(c), "switch_out must be >= 0");
    for (double c : switch_in) require(c >= 0.0 && std::isfinite(c), "switch_in must be >= 0");
    if (has_switching()) {
        if (has_durations())
            throw Error(ErrorKind::VariantMismatch, "switching costs cannot be combined with durations > 1");
        if (M != 1) throw Error(ErrorKind::VariantMismatch, "switching costs require M = 1");
    }
}

void ProbeInstance::validate() const {
    require(!arms.empty(), "instance has no arms");
    require(M >= 1, "M must be >= 1");
    for (const auto& a : arms) require(a.cost >= 0.0 && std::isfinite(a.cost), "probe cost must be >= 0");
}

void ReplenishInstance::validate() const {
    require(!machines.empty(), "instance has no machines");
    require(M >= 1, "M must be >= 1");
    for (std::size_t i = 0; i < machines.size(); ++i) {
        const auto& m = machines[i];
        std::size_t K = m.reward.size();
        std::ostringstream id;
        id << "machine " << i << ": ";
        require(K >= 1, id.str() + "no states");
        require(m.repair_cost.size() == K && m.p.size() == K, id.str() + "shape mismatch");
        require(m.s > 0.0 && m.s <= 1.0, id.str() + "repair rate must be in (0,1]");
        require(m.rho >= 0 && static_cast<std::size_t>(m.rho) < K, id.str() + "rho out of range");
        for (std::size_t u = 0; u < K; ++u) {
            require(m.reward[u] >= 0.0 && m.repair_cost[u] >= 0.0, id.str() + "negative reward or cost");
            require(m.p[u].size() == K, id.str() + "p must be square");
            double row = 0.0;
            for (double v : m.p[u]) {
                require(v >= 0.0 && std::isfinite(v), id.str() + "p entries must be >= 0");
                row += v;
            }
            require(std::abs(row - 1.0) <= 1e-12, id.str() + "p rows must sum to 1");
        }
    }
}

std::int64_t mixing_horizon(const FeedbackArm& arm, double tol, std::int64_t cap) {
    double l = std::log1p(-(arm.alpha + arm.beta));
    if (l >= 0.0) return cap;
    double T = std::ceil(std::log(tol) / l);
    if (!(T < static_cast<double>(cap))) return cap;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(T));
}

}  // namespace rb
