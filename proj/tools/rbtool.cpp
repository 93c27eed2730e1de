#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rb/feedback.hpp"
#include "rb/gallery.hpp"
#include "rb/io.hpp"
#include "rb/monotone.hpp"
#include "rb/probe.hpp"
#include "rb/replenish.hpp"
#include "rb/sim.hpp"
#include "rb/whittle.hpp"

using namespace rb;
using nlohmann::json;

namespace {

struct Flags {
    double eps = 1e-3;
    std::uint64_t seed = 1;
    std::int64_t horizon = 100000;
    std::int64_t burnin = 1000;
    int reps = 10;
    std::int64_t tmax = 100;
    bool exact = false;
    std::string out;
    std::string format = "json";
    std::optional<int> n;
    std::optional<double> beta;
    std::vector<std::string> states;
};

struct Call {
    std::string name;
    std::vector<std::string> args;
};

// "name" or "name(a,b)"
Call parse_call(const std::string& s) {
    static const std::regex re(R"(^\s*([A-Za-z0-9_-]+)\s*(?:\((.*)\))?\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw Error(ErrorKind::InvalidInput, "cannot parse '" + s + "'");
    Call c{m[1].str(), {}};
    if (m[2].matched) {
        std::stringstream ss(m[2].str());
        std::string a;
        while (std::getline(ss, a, ',')) {
            a.erase(0, a.find_first_not_of(" \t"));
            a.erase(a.find_last_not_of(" \t") + 1);
            if (!a.empty()) c.args.push_back(a);
        }
    }
    return c;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidInput, what + ": '" + s + "' is not a number");
}

int to_int(const std::string& s, const std::string& what) {
    double v = to_double(s, what);
    if (v != static_cast<int>(v)) throw Error(ErrorKind::InvalidInput, what + ": '" + s + "' is not an integer");
    return static_cast<int>(v);
}

int gallery_n(const Call& c, const Flags& f, int dflt) {
    if (!c.args.empty()) return to_int(c.args[0], c.name + " n");
    return f.n.value_or(dflt);
}

double gallery_beta(const Call& c, const Flags& f, double dflt) {
    if (c.args.size() > 1) return to_double(c.args[1], c.name + " beta");
    return f.beta.value_or(dflt);
}

bool is_gallery(const std::string& name) {
    return name == "myopic-gap" || name == "index-gap" || name == "lp-gap" || name == "replenish-gap" ||
           name == "nonseparable-gap";
}

AnyInstance gallery_instance(const Call& c, const Flags& f) {
    if (c.name == "myopic-gap") return myopic_gap(gallery_n(c, f, 12));
    if (c.name == "index-gap") return index_gap();
    if (c.name == "lp-gap") return lp_gap(gallery_n(c, f, 50), gallery_beta(c, f, 1e-5)).instance;
    if (c.name == "replenish-gap") return replenish_gap(gallery_n(c, f, 10));
    throw Error(ErrorKind::UnsupportedShape, c.name + " has no solvable instance; use 'emit' to print its document");
}

AnyInstance load_source(const std::string& src, const Flags& f) {
    if (std::filesystem::exists(src)) return load_instance_file(src);
    Call c = parse_call(src);
    if (is_gallery(c.name)) return gallery_instance(c, f);
    throw Error(ErrorKind::InvalidInput, "'" + src + "' is neither an instance file nor a gallery id");
}

json t_json(std::int64_t t) { return t == kNever ? json(nullptr) : json(t); }

void write_out(const Flags& f, const std::string& text) {
    if (f.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream o(f.out, std::ios::binary);
    if (!o) throw Error(ErrorKind::InvalidInput, "cannot write '" + f.out + "'");
    o << text;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

SimConfig sim_config(const Flags& f) {
    SimConfig c;
    c.seed = f.seed;
    c.horizon = f.horizon;
    c.burnin = f.burnin;
    c.reps = f.reps;
    c.validate();
    return c;
}

std::vector<BeliefState> requested_states(const Flags& f) {
    std::vector<std::string> wanted = f.states;
    if (wanted.empty()) wanted = {"g:1", "b:1", "b:2", "b:5", "b:10"};
    std::vector<BeliefState> out;
    for (const auto& s : wanted) {
        auto colon = s.find(':');
        if (colon == std::string::npos || (s[0] != 'g' && s[0] != 'b') || colon != 1)
            throw Error(ErrorKind::InvalidInput, "--state expects g:t or b:t, got '" + s + "'");
        int t = to_int(s.substr(2), "--state");
        if (t < 1) throw Error(ErrorKind::ParameterOutOfRange, "--state needs t >= 1");
        out.push_back({s[0] == 'g' ? Obs::g : Obs::b, t});
    }
    return out;
}

// ---- index ----

json index_report(const FeedbackInstance& inst, const Flags& f) {
    FeedbackPolicyParams p = balanced_lambda(inst.arms, f.eps);
    std::vector<BeliefState> states = requested_states(f);
    json arms = json::array();
    for (std::size_t i = 0; i < inst.arms.size(); ++i) {
        const auto& a = p.arms[i];
        json idx = json::object();
        for (const auto& s : states)
            idx[std::string(s.last == Obs::g ? "g" : "b") + ":" + std::to_string(s.t)] = whittle_index(inst.arms[i], s);
        arms.push_back({{"h", a.h}, {"t", t_json(a.t)}, {"p", a.p}, {"active", a.active}, {"whittle", idx}});
    }
    return {{"type", "feedback"},
            {"lambda_star", p.lambda_star},
            {"lambda_lower", p.lambda_lower},
            {"lambda_upper", p.lambda_upper},
            {"eps", p.eps},
            {"G", p.G},
            {"lp_upper_bound", whittle_lp_upper_bound(inst.arms)},
            {"arms", arms}};
}

json index_report(const MonotoneInstance& inst, const Flags&) {
    MonotoneVariant v = natural_variant(inst);
    BalanceSolution s = solve_balance(inst, v);
    json arms = json::array();
    for (const auto& a : s.arms) {
        json st = json::array();
        for (std::size_t k = 0; k < a.t.size(); ++k)
            st.push_back({{"t", a.t[k]}, {"class", a.good[k] ? "G" : "I"}, {"p", a.p[k]}, {"dP", a.dP[k]}});
        arms.push_back({{"h", a.h}, {"active", a.active}, {"continuous_play", a.u1}, {"play_rate", a.play_rate},
                        {"states", st}});
    }
    return {{"type", "monotone"},       {"variant", variant_name(v)},
            {"M", s.M},                 {"lambda", s.lambda},
            {"objective", s.objective}, {"sum_h", s.sum_h},
            {"cs_residual", s.cs_residual}, {"lp_value", whittle_lp_value(inst, v)},
            {"arms", arms}};
}

json index_report(const ProbeInstance& inst, const Flags&) {
    ProbePolicyParams p = solve_probe(inst);
    json arms = json::array();
    for (const auto& a : p.arms)
        arms.push_back({{"h", a.h}, {"p", a.p}, {"active", a.active}, {"T", a.T}, {"e", a.e}, {"d", a.d}, {"m", a.m},
                        {"identity_residual", std::max(a.identity_d, a.identity_e)}});
    std::vector<std::int64_t> T;
    for (const auto& a : p.arms) T.push_back(a.T);
    return {{"type", "probe"},     {"M", p.M},
            {"lambda", p.lambda},  {"objective", p.objective},
            {"sum_h", p.sum_h},    {"lp_value", probe_lp_value(inst, T)},
            {"arms", arms}};
}

json index_report(const ReplenishInstance& inst, const Flags&) {
    ReplenishParams p = solve_replenish(inst);
    json ms = json::array();
    for (const auto& m : p.machines) {
        json trig = json::array();
        for (std::size_t u = 0; u < m.trigger.size(); ++u)
            if (m.trigger[u]) trig.push_back(u);
        ms.push_back({{"h", m.h}, {"active", m.active}, {"phi", m.phi}, {"repair_states", trig}});
    }
    json j = {{"type", "replenish"},        {"M", p.M},
              {"lambda", p.lambda},         {"objective", p.objective},
              {"sum_h", p.sum_h},           {"cs_residual", p.cs_residual},
              {"lp_value", replenish_lp_value(inst)}, {"machines", ms}};
    try {
        j["repair_indices"] = whittle_replenish_indices(inst);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::UnsupportedShape) throw;
    }
    return j;
}

// ---- simulate ----

struct Outcome {
    std::string policy;
    std::optional<double> exact;
    std::optional<SimResult> sim;
};

FeedbackPolicy feedback_policy(const FeedbackInstance& inst, const Call& pol, const Flags& f) {
    const std::string& n = pol.name;
    if (n == "balanced") return make_balanced_policy(balanced_lambda(inst.arms, f.eps));
    if (n == "threshold-whittle" || n == "plain-whittle") {
        auto table = std::make_shared<WhittleIndexTable>(inst.arms);
        if (n == "plain-whittle") return [table](const std::vector<BeliefState>& b) { return plain_whittle_next(*table, b); };
        double ls = balanced_lambda(inst.arms, f.eps).lambda_star;
        return [table, ls](const std::vector<BeliefState>& b) { return threshold_whittle_next(ls, *table, b); };
    }
    if (n == "myopic") return make_myopic_policy(inst.arms);
    if (n == "always-play") {
        if (pol.args.size() != 1) throw Error(ErrorKind::InvalidInput, "always-play needs one arm index, e.g. always-play(0)");
        int i = to_int(pol.args[0], "always-play");
        if (i < 0 || i >= static_cast<int>(inst.arms.size()))
            throw Error(ErrorKind::ParameterOutOfRange, "always-play arm index out of range");
        return make_always_play_policy(i);
    }
    if (n == "round-robin") {
        std::vector<int> subset;
        for (const auto& a : pol.args) subset.push_back(to_int(a, "round-robin"));
        if (subset.empty())
            for (int i = 1; i < static_cast<int>(inst.arms.size()); ++i) subset.push_back(i);
        for (int i : subset)
            if (i < 0 || i >= static_cast<int>(inst.arms.size()))
                throw Error(ErrorKind::ParameterOutOfRange, "round-robin arm index out of range");
        return make_round_robin_policy(subset);
    }
    if (n == "optimal-vi") {
        auto vi = std::make_shared<ViResult>(vi_optimal(inst, 0.99, f.tmax));
        return [vi](const std::vector<BeliefState>& b) { return vi->policy(b); };
    }
    throw Error(ErrorKind::InvalidInput, "unknown feedback policy '" + n + "'");
}

void only_balanced(const Call& pol, const char* type) {
    if (pol.name != "balanced")
        throw Error(ErrorKind::InvalidInput, std::string(type) + " instances support the 'balanced' policy only");
}

void no_exact(const Flags& f, const char* type) {
    if (f.exact)
        throw Error(ErrorKind::UnsupportedShape, std::string("--exact is not available for ") + type + " instances");
}

Outcome run(const FeedbackInstance& inst, const Call& pol, const Flags& f) {
    FeedbackPolicy p = feedback_policy(inst, pol, f);
    Outcome o;
    if (f.exact) {
        ExactOptions opt;
        opt.T_cap = f.tmax;
        o.exact = exact_policy_eval(inst, p, opt);
    } else {
        o.sim = simulate(inst, p, sim_config(f));
    }
    return o;
}

Outcome run(const MonotoneInstance& inst, const Call& pol, const Flags& f) {
    only_balanced(pol, "monotone");
    no_exact(f, "monotone");
    BalanceSolution s = solve_balance(inst, natural_variant(inst));
    return {"", std::nullopt, simulate_monotone(inst, s, sim_config(f))};
}

Outcome run(const ProbeInstance& inst, const Call& pol, const Flags& f) {
    only_balanced(pol, "probe");
    no_exact(f, "probe");
    ProbePolicyParams p = solve_probe(inst);
    return {"", std::nullopt, simulate_probe(inst, p, sim_config(f))};
}

Outcome run(const ReplenishInstance& inst, const Call& pol, const Flags& f) {
    ReplenishParams params;
    ReplenishPolicy p;
    const ReplenishParams* audit = nullptr;
    if (pol.name == "balanced") {
        params = solve_replenish(inst);
        p = make_replenish_policy(params, inst);
        audit = &params;
    } else if (pol.name == "plain-whittle") {
        p = make_whittle_replenish_policy(inst);
    } else {
        throw Error(ErrorKind::InvalidInput, "replenish instances support 'balanced' and 'plain-whittle'");
    }
    Outcome o;
    if (f.exact)
        o.exact = exact_replenish_eval(inst, p);
    else
        o.sim = simulate_replenish(inst, p, sim_config(f), audit);
    return o;
}

std::string render_simulate(const AnyInstance& inst, const std::string& policy, const Outcome& o, const Flags& f) {
    if (f.format == "csv") {
        std::string s;
        if (o.exact) return "exact\n" + num(*o.exact) + "\n";
        s = "rep,mean\n";
        for (std::size_t r = 0; r < o.sim->rep_means.size(); ++r) s += std::to_string(r) + "," + num(o.sim->rep_means[r]) + "\n";
        return s;
    }
    json j = {{"type", instance_type_name(inst)}, {"policy", policy}};
    if (o.exact) {
        j["exact"] = *o.exact;
        j["tmax"] = f.tmax;
    } else {
        const SimResult& r = *o.sim;
        j["config"] = {{"seed", f.seed}, {"horizon", f.horizon}, {"burnin", f.burnin}, {"reps", f.reps}};
        j["mean"] = r.mean;
        j["stderr"] = r.stderr_;
        j["rep_means"] = r.rep_means;
        j["play_rate"] = r.play_rate;
        j["probes"] = r.probes;
        j["switches"] = r.switches;
        j["repairs"] = r.repairs;
        j["switch_cost_paid"] = r.switch_cost_paid;
        j["crediting"] = r.crediting;
    }
    return j.dump(2) + "\n";
}

// ---- gap ----

struct Row {
    std::string quantity;
    double measured;
    std::string relation;  // ">=", "<=", "~", or "" for informational rows
    double target;
    double tol = 0.0;
    bool pass() const {
        if (relation == ">=") return measured >= target;
        if (relation == "<=") return measured <= target;
        if (relation == "~") return std::abs(measured - target) <= tol;
        return true;
    }
};

std::vector<Row> gap_rows(const Call& c, Flags f, bool horizon_given, bool reps_given, bool burnin_given) {
    std::vector<Row> rows;
    if (c.name == "lp-gap") {
        LpGap g = lp_gap(gallery_n(c, f, 50), gallery_beta(c, f, 1e-5));
        double lp = whittle_lp_upper_bound(g.instance.arms);
        rows.push_back({"lp_value", lp, "", 0.0});
        rows.push_back({"complete_information_bound", g.complete_info_bound, "", 0.0});
        rows.push_back({"ratio", lp / g.complete_info_bound, ">=", 1.5});
    } else if (c.name == "index-gap") {
        FeedbackInstance inst = index_gap();
        ViResult vi = vi_optimal(inst, 0.99, f.tmax);
        auto region = [](int K, bool diag) {
            return make_region_policy([K, diag](std::int64_t a, std::int64_t b) { return a <= K && b <= K && (!diag || a + b <= 6); });
        };
        bool match = true;
        for (int k1 = 1; k1 <= 12; ++k1)
            for (int k2 = 1; k2 <= 12; ++k2) {
                bool in = k1 <= 4 && k2 <= 4 && k1 + k2 <= 6;
                bool plays0 = vi.policy({{Obs::g, 1}, {Obs::b, k1}, {Obs::b, k2}}) == 0;
                match = match && in == plays0;
            }
        rows.push_back({"vi_region_matches_D*", match ? 1.0 : 0.0, ">=", 1.0});
        rows.push_back({"optimal_D*", exact_policy_eval(inst, region(4, true)), "~", 1.46218, 1e-3});
        rows.push_back({"square_4", exact_policy_eval(inst, region(4, false)), "~", 1.46167, 1e-3});
        rows.push_back({"square_3", exact_policy_eval(inst, region(3, false)), "~", 1.46104, 1e-3});
        rows.push_back({"vi_average", vi.average_reward, "", 0.0});
    } else if (c.name == "myopic-gap") {
        int n = gallery_n(c, f, 12);
        FeedbackInstance inst = myopic_gap(n);
        if (!horizon_given) f.horizon = 1000000;
        if (!reps_given) f.reps = 4;
        // type-2 arms seen in g at the start hold g for about 2^n steps
        if (!burnin_given) f.burnin = std::min<std::int64_t>(f.horizon / 2, std::int64_t(40) << n);
        std::vector<int> type2;
        for (int i = 1; i <= n; ++i) type2.push_back(i);
        SimConfig cfg = sim_config(f);
        SimResult my = simulate(inst, make_myopic_policy(inst.arms), cfg);
        SimResult rr = simulate(inst, make_round_robin_policy(type2), cfg);
        rows.push_back({"myopic", my.mean, "<=", 1.2});
        rows.push_back({"round_robin_type2", rr.mean, ">=", n / 4.0});
        rows.push_back({"ratio", rr.mean / my.mean, "", 0.0});
    } else if (c.name == "replenish-gap") {
        ReplenishInstance inst = replenish_gap(gallery_n(c, f, 10));
        if (!horizon_given) f.horizon = 400000;
        if (!reps_given) f.reps = 4;
        ReplenishParams p = solve_replenish(inst);
        ReplenishPolicy dual = make_replenish_policy(p, inst);
        ReplenishPolicy whit = make_whittle_replenish_policy(inst);
        double ed = exact_replenish_eval(inst, dual);
        double ew = exact_replenish_eval(inst, whit);
        SimConfig cfg = sim_config(f);
        SimResult sd = simulate_replenish(inst, dual, cfg, &p);
        SimResult sw = simulate_replenish(inst, whit, cfg);
        rows.push_back({"balanced_exact", ed, ">=", 0.40});
        rows.push_back({"balanced_simulated", sd.mean, ">=", 0.40});
        rows.push_back({"plain_whittle_exact", ew, "<=", 0.01});
        rows.push_back({"plain_whittle_simulated", sw.mean, "<=", 0.01});
        rows.push_back({"exact_ratio", ed / ew, ">=", 40.0});
        rows.push_back({"lp_value", replenish_lp_value(inst), "", 0.0});
    } else {
        throw Error(ErrorKind::InvalidInput, "unknown gap family '" + c.name + "'");
    }
    return rows;
}

std::string render_gap(const std::string& family, const std::vector<Row>& rows, const Flags& f) {
    if (f.format == "csv") {
        std::string s = "quantity,measured,relation,target,pass\n";
        for (const auto& r : rows)
            s += r.quantity + "," + num(r.measured) + "," + r.relation + "," + (r.relation.empty() ? "" : num(r.target)) + "," +
                 (r.pass() ? "1" : "0") + "\n";
        return s;
    }
    json arr = json::array();
    bool all = true;
    for (const auto& r : rows) {
        json e = {{"quantity", r.quantity}, {"measured", r.measured}};
        if (!r.relation.empty()) {
            e["relation"] = r.relation;
            e["target"] = r.target;
            if (r.relation == "~") e["tolerance"] = r.tol;
            e["pass"] = r.pass();
        }
        all = all && r.pass();
        arr.push_back(e);
    }
    return json{{"family", family}, {"rows", arr}, {"all_pass", all}}.dump(2) + "\n";
}

int report_error(const Error& e) {
    std::string msg = e.what();
    if (e.kind() == ErrorKind::StateSpaceTooLarge) msg += " (try a smaller --tmax, or drop --exact to simulate)";
    std::cerr << "rbtool: " << msg << "\n";
    return e.is_input_error() ? 2 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"restless bandit index policies: solve, simulate, reproduce gap instances"};
    app.require_subcommand(1);
    Flags f;
    std::string source, policy, family;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", f.out, "write the report to this path instead of stdout");
        sub->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}));
    };
    auto sim_flags = [&](CLI::App* sub) {
        sub->add_option("--eps", f.eps, "relative accuracy of the balanced multiplier scan");
        sub->add_option("--seed", f.seed, "master seed");
        sub->add_option("--horizon", f.horizon, "measured steps per replication");
        sub->add_option("--burnin", f.burnin, "discarded steps per replication");
        sub->add_option("--reps", f.reps, "replications");
        sub->add_option("--tmax", f.tmax, "belief cap for exact evaluation and value iteration");
        sub->add_option("--n", f.n, "gallery size parameter");
        sub->add_option("--beta", f.beta, "gallery beta parameter");
    };

    CLI::App* idx = app.add_subcommand("index", "balanced multiplier, per-arm parameters and indices");
    idx->add_option("instance", source, "instance file or gallery id")->required();
    idx->add_option("--eps", f.eps, "relative accuracy of the balanced multiplier scan");
    idx->add_option("--state", f.states, "belief states for the index table, as g:t or b:t");
    idx->add_option("--n", f.n, "gallery size parameter");
    idx->add_option("--beta", f.beta, "gallery beta parameter");
    idx->add_option("--out", f.out, "write the report to this path instead of stdout");

    CLI::App* sim = app.add_subcommand("simulate", "simulate or exactly evaluate a policy");
    sim->add_option("instance", source, "instance file or gallery id")->required();
    sim->add_option("policy", policy,
                    "balanced | threshold-whittle | plain-whittle | myopic | always-play(i) | round-robin(i,...) | optimal-vi")
        ->required();
    sim->add_flag("--exact", f.exact, "evaluate the induced chain exactly instead of simulating");
    sim_flags(sim);
    common(sim);

    CLI::App* gap = app.add_subcommand("gap", "reproduce a gap family and check the claimed separation");
    gap->add_option("family", family, "lp-gap | index-gap | myopic-gap | replenish-gap")->required();
    sim_flags(gap);
    common(gap);

    CLI::App* emit = app.add_subcommand("emit", "print an instance in the file schema");
    emit->add_option("instance", source, "instance file or gallery id")->required();
    emit->add_option("--n", f.n, "gallery size parameter");
    emit->add_option("--beta", f.beta, "gallery beta parameter");
    emit->add_option("--out", f.out, "write to this path instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*idx) {
            AnyInstance inst = load_source(source, f);
            json j = std::visit([&](const auto& in) { return index_report(in, f); }, inst);
            write_out(f, j.dump(2) + "\n");
        } else if (*sim) {
            AnyInstance inst = load_source(source, f);
            Call pol = parse_call(policy);
            Outcome o = std::visit([&](const auto& in) { return run(in, pol, f); }, inst);
            write_out(f, render_simulate(inst, policy, o, f));
        } else if (*gap) {
            Call c = parse_call(family);
            if (c.name == "nonseparable-gap") {
                write_out(f, nonseparable_gap(gallery_n(c, f, 10)).dump(2) + "\n");
            } else {
                std::vector<Row> rows = gap_rows(c, f, gap->count("--horizon") > 0, gap->count("--reps") > 0,
                                                 gap->count("--burnin") > 0);
                write_out(f, render_gap(family, rows, f));
            }
        } else if (*emit) {
            if (!std::filesystem::exists(source) && parse_call(source).name == "nonseparable-gap")
                write_out(f, nonseparable_gap(gallery_n(parse_call(source), f, 10)).dump(2) + "\n");
            else
                write_out(f, emit_instance(load_source(source, f)));
        }
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "rbtool: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
