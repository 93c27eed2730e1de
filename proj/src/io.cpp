#include "rb/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rb {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg, ErrorKind k = ErrorKind::InvalidInput) {
    throw Error(k, (path.empty() ? std::string("document") : path) + ": " + msg);
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Strips the "Kind: " prefix so that a core error can be re-raised under a field path.
std::string bare(const Error& e) {
    std::string w = e.what();
    std::string pre = std::string(error_kind_name(e.kind())) + ": ";
    return w.rfind(pre, 0) == 0 ? w.substr(pre.size()) : w;
}

template <class F>
void at_path(const std::string& path, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        fail(path, bare(e), e.kind());
    }
}

void expect_object(const json& j, const std::string& path, std::set<std::string> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) fail(child(path, k), "unknown field");
}

const json& member(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(child(path, key), "missing required field");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
}

std::int64_t integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<std::int64_t>();
}

const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
}

std::vector<double> numbers(const json& j, const std::string& path) {
    std::vector<double> v;
    for (std::size_t i = 0; i < array(j, path).size(); ++i) v.push_back(number(j[i], index(path, i)));
    return v;
}

std::vector<std::vector<double>> matrix(const json& j, const std::string& path) {
    std::vector<std::vector<double>> m;
    for (std::size_t i = 0; i < array(j, path).size(); ++i) m.push_back(numbers(j[i], index(path, i)));
    return m;
}

int read_M(const json& j) {
    if (!j.contains("M")) return 1;
    std::int64_t M = integer(j["M"], "M");
    if (M < 1 || M > 1000000) fail("M", "must be a positive integer");
    return static_cast<int>(M);
}

double read_delta(const json& j) {
    if (!j.contains("delta")) return kDefaultDelta;
    double d = number(j["delta"], "delta");
    if (!(d > 0.0 && d < 0.5)) fail("delta", "must lie in (0, 0.5)", ErrorKind::ParameterOutOfRange);
    return d;
}

FeedbackArm read_feedback_arm(const json& a, const std::string& path, double delta) {
    double alpha = number(member(a, path, "alpha"), child(path, "alpha"));
    double beta = number(member(a, path, "beta"), child(path, "beta"));
    double r = number(member(a, path, "r"), child(path, "r"));
    FeedbackArm arm;
    at_path(path, [&] { arm = FeedbackArm(alpha, beta, r, delta); });
    return arm;
}

FeedbackInstance read_feedback(const json& j) {
    expect_object(j, "", {"type", "delta", "M", "arms"});
    FeedbackInstance inst;
    inst.delta = read_delta(j);
    inst.M = read_M(j);
    if (inst.M != 1) fail("M", "feedback instances take one play per step; encode as monotone for M > 1",
                          ErrorKind::UnsupportedShape);
    const json& arms = array(member(j, "", "arms"), "arms");
    if (arms.empty()) fail("arms", "instance has no arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        std::string p = index("arms", i);
        expect_object(arms[i], p, {"alpha", "beta", "r"});
        inst.arms.push_back(read_feedback_arm(arms[i], p, inst.delta));
    }
    return inst;
}

MonotoneInstance read_monotone(const json& j) {
    expect_object(j, "", {"type", "M", "arms", "switch_in", "switch_out"});
    MonotoneInstance inst;
    inst.M = read_M(j);
    const json& arms = array(member(j, "", "arms"), "arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        std::string p = index("arms", i);
        expect_object(arms[i], p, {"states", "q"});
        MonotoneArm arm;
        std::string sp = child(p, "states");
        const json& states = array(member(arms[i], p, "states"), sp);
        for (std::size_t k = 0; k < states.size(); ++k) {
            std::string kp = index(sp, k);
            const json& s = states[k];
            expect_object(s, kp, {"r", "duration", "f_breakpoints"});
            MonotoneState st;
            st.r = number(member(s, kp, "r"), child(kp, "r"));
            if (s.contains("duration")) st.duration = integer(s["duration"], child(kp, "duration"));
            std::string fp = child(kp, "f_breakpoints");
            const json& bp = array(member(s, kp, "f_breakpoints"), fp);
            std::vector<std::pair<std::int64_t, double>> pts;
            for (std::size_t b = 0; b < bp.size(); ++b) {
                std::string bpp = index(fp, b);
                if (!bp[b].is_array() || bp[b].size() != 2) fail(bpp, "expected a [t, value] pair");
                pts.emplace_back(integer(bp[b][0], index(bpp, 0)), number(bp[b][1], index(bpp, 1)));
            }
            at_path(fp, [&] { st.f = PiecewiseLinearMonotone(pts); });
            arm.states.push_back(st);
        }
        arm.q = matrix(member(arms[i], p, "q"), child(p, "q"));
        at_path(p, [&] { arm.validate(); });
        inst.arms.push_back(std::move(arm));
    }
    if (j.contains("switch_out")) inst.switch_out = numbers(j["switch_out"], "switch_out");
    if (j.contains("switch_in")) inst.switch_in = numbers(j["switch_in"], "switch_in");
    at_path("", [&] { inst.validate(); });
    return inst;
}

ProbeInstance read_probe(const json& j) {
    expect_object(j, "", {"type", "delta", "M", "arms"});
    ProbeInstance inst;
    double delta = read_delta(j);
    inst.M = read_M(j);
    const json& arms = array(member(j, "", "arms"), "arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        std::string p = index("arms", i);
        expect_object(arms[i], p, {"alpha", "beta", "r", "cost"});
        ProbeArm a;
        a.arm = read_feedback_arm(arms[i], p, delta);
        a.cost = number(member(arms[i], p, "cost"), child(p, "cost"));
        if (a.cost < 0.0) fail(child(p, "cost"), "probe cost must be >= 0");
        inst.arms.push_back(a);
    }
    at_path("", [&] { inst.validate(); });
    return inst;
}

ReplenishInstance read_replenish(const json& j) {
    expect_object(j, "", {"type", "M", "machines"});
    ReplenishInstance inst;
    inst.M = read_M(j);
    const json& ms = array(member(j, "", "machines"), "machines");
    for (std::size_t i = 0; i < ms.size(); ++i) {
        std::string p = index("machines", i);
        expect_object(ms[i], p, {"reward", "repair_cost", "p", "s", "rho"});
        Machine m;
        m.reward = numbers(member(ms[i], p, "reward"), child(p, "reward"));
        m.repair_cost = numbers(member(ms[i], p, "repair_cost"), child(p, "repair_cost"));
        m.p = matrix(member(ms[i], p, "p"), child(p, "p"));
        m.s = number(member(ms[i], p, "s"), child(p, "s"));
        if (ms[i].contains("rho")) {
            std::int64_t rho = integer(ms[i]["rho"], child(p, "rho"));
            if (rho < 0 || rho >= static_cast<std::int64_t>(m.reward.size())) fail(child(p, "rho"), "out of range");
            m.rho = static_cast<int>(rho);
        }
        ReplenishInstance one;
        one.machines.push_back(m);
        at_path(p, [&] { one.validate(); });
        inst.machines.push_back(std::move(m));
    }
    at_path("", [&] { inst.validate(); });
    return inst;
}

json feedback_arm_json(const FeedbackArm& a) { return {{"alpha", a.alpha}, {"beta", a.beta}, {"r", a.r}}; }

struct Emitter {
    json operator()(const FeedbackInstance& in) const {
        json arms = json::array();
        for (const auto& a : in.arms) arms.push_back(feedback_arm_json(a));
        return {{"type", "feedback"}, {"delta", in.delta}, {"M", in.M}, {"arms", arms}};
    }
    json operator()(const MonotoneInstance& in) const {
        json arms = json::array();
        for (const auto& a : in.arms) {
            json states = json::array();
            for (const auto& s : a.states) {
                json bp = json::array();
                for (auto [t, v] : s.f.breakpoints()) bp.push_back(json::array({t, v}));
                states.push_back({{"r", s.r}, {"duration", s.duration}, {"f_breakpoints", bp}});
            }
            arms.push_back({{"states", states}, {"q", a.q}});
        }
        json j = {{"type", "monotone"}, {"M", in.M}, {"arms", arms}};
        if (!in.switch_out.empty()) j["switch_out"] = in.switch_out;
        if (!in.switch_in.empty()) j["switch_in"] = in.switch_in;
        return j;
    }
    json operator()(const ProbeInstance& in) const {
        json arms = json::array();
        for (const auto& a : in.arms) {
            json e = feedback_arm_json(a.arm);
            e["cost"] = a.cost;
            arms.push_back(e);
        }
        return {{"type", "probe"}, {"delta", kDefaultDelta}, {"M", in.M}, {"arms", arms}};
    }
    json operator()(const ReplenishInstance& in) const {
        json ms = json::array();
        for (const auto& m : in.machines)
            ms.push_back({{"reward", m.reward}, {"repair_cost", m.repair_cost}, {"p", m.p}, {"s", m.s}, {"rho", m.rho}});
        return {{"type", "replenish"}, {"M", in.M}, {"machines", ms}};
    }
};

bool same_arm(const FeedbackArm& a, const FeedbackArm& b) { return a.alpha == b.alpha && a.beta == b.beta && a.r == b.r; }

struct Same {
    const AnyInstance& other;
    bool operator()(const FeedbackInstance& a) const {
        const auto& b = std::get<FeedbackInstance>(other);
        if (a.delta != b.delta || a.M != b.M || a.arms.size() != b.arms.size()) return false;
        for (std::size_t i = 0; i < a.arms.size(); ++i)
            if (!same_arm(a.arms[i], b.arms[i])) return false;
        return true;
    }
    bool operator()(const MonotoneInstance& a) const {
        const auto& b = std::get<MonotoneInstance>(other);
        if (a.M != b.M || a.switch_in != b.switch_in || a.switch_out != b.switch_out || a.arms.size() != b.arms.size())
            return false;
        for (std::size_t i = 0; i < a.arms.size(); ++i) {
            const auto& x = a.arms[i];
            const auto& y = b.arms[i];
            if (x.q != y.q || x.states.size() != y.states.size()) return false;
            for (std::size_t k = 0; k < x.states.size(); ++k) {
                const auto& s = x.states[k];
                const auto& t = y.states[k];
                if (s.r != t.r || s.duration != t.duration || s.f.breakpoints() != t.f.breakpoints()) return false;
            }
        }
        return true;
    }
    bool operator()(const ProbeInstance& a) const {
        const auto& b = std::get<ProbeInstance>(other);
        if (a.M != b.M || a.arms.size() != b.arms.size()) return false;
        for (std::size_t i = 0; i < a.arms.size(); ++i)
            if (!same_arm(a.arms[i].arm, b.arms[i].arm) || a.arms[i].cost != b.arms[i].cost) return false;
        return true;
    }
    bool operator()(const ReplenishInstance& a) const {
        const auto& b = std::get<ReplenishInstance>(other);
        if (a.M != b.M || a.machines.size() != b.machines.size()) return false;
        for (std::size_t i = 0; i < a.machines.size(); ++i) {
            const auto& x = a.machines[i];
            const auto& y = b.machines[i];
            if (x.reward != y.reward || x.repair_cost != y.repair_cost || x.p != y.p || x.s != y.s || x.rho != y.rho)
                return false;
        }
        return true;
    }
};

}  // namespace

const char* instance_type_name(const AnyInstance& inst) {
    static const char* names[] = {"feedback", "monotone", "probe", "replenish"};
    return names[inst.index()];
}

AnyInstance instance_from_json(const json& j) {
    if (!j.is_object()) fail("", "expected an object");
    const json& type = member(j, "", "type");
    if (!type.is_string()) fail("type", "expected a string");
    std::string t = type.get<std::string>();
    if (t == "feedback") return read_feedback(j);
    if (t == "monotone") return read_monotone(j);
    if (t == "probe") return read_probe(j);
    if (t == "replenish") return read_replenish(j);
    if (t == "nonseparable") fail("type", "non-separable instances are documentation only; no solver accepts them",
                                  ErrorKind::UnsupportedShape);
    fail("type", "unknown instance type '" + t + "'");
}

json instance_to_json(const AnyInstance& inst) { return std::visit(Emitter{}, inst); }

AnyInstance parse_instance(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed JSON: ") + e.what());
    }
    return instance_from_json(j);
}

AnyInstance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open instance file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

std::string emit_instance(const AnyInstance& inst) { return instance_to_json(inst).dump(2) + "\n"; }

bool same_instance(const AnyInstance& a, const AnyInstance& b) {
    if (a.index() != b.index()) return false;
    return std::visit(Same{b}, a);
}

}  // namespace rb
