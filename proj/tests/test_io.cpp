#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "random_monotone.hpp"
#include "random_probe.hpp"
#include "random_replenish.hpp"
#include "rb/gallery.hpp"
#include "rb/io.hpp"

using namespace rb;
using nlohmann::json;

namespace {

ErrorKind load_error(const std::string& text, std::string* what = nullptr) {
    try {
        parse_instance(text);
    } catch (const Error& e) {
        if (what) *what = e.what();
        return e.kind();
    }
    FAIL("expected a load error");
    return ErrorKind::NumericFailure;
}

void round_trip(const AnyInstance& inst) {
    std::string text = emit_instance(inst);
    AnyInstance back = parse_instance(text);
    CHECK(same_instance(inst, back));
    CHECK(emit_instance(back) == text);
}

}  // namespace

TEST_CASE("round trip is exact for every instance type") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        FeedbackInstance f;
        int n = 1 + static_cast<int>(rng() % 5);
        // irrational-looking values need all 17 digits
        for (int i = 0; i < n; ++i) f.arms.emplace_back(0.01 + 0.3 * U(rng), 0.01 + 0.3 * U(rng), U(rng) * 3.7);
        round_trip(f);

        test::MonotoneShape sh;
        sh.max_cost = trial % 2 ? 0.4 : 0.0;
        round_trip(test::random_monotone(rng, sh));
        round_trip(test::random_probe(rng));
        round_trip(test::random_replenish(rng, 3, 4, 2));
    }
    round_trip(myopic_gap(12));
    round_trip(index_gap());
    round_trip(replenish_gap(10));
    round_trip(lp_gap(50, 1e-5).instance);
}

TEST_CASE("emitted document layout") {
    json j = instance_to_json(index_gap());
    CHECK(j["type"] == "feedback");
    CHECK(j["arms"].size() == 3);
    CHECK(j["arms"][1]["alpha"] == 0.1);
    test::MonotoneShape sh;
    std::mt19937_64 rng(1);
    json m = instance_to_json(test::random_monotone(rng, sh));
    CHECK(m["arms"][0]["states"][0]["f_breakpoints"][0][0] == 1);
    CHECK(m["arms"][0]["states"][0]["duration"] == 1);
}

TEST_CASE("schema errors name the field") {
    std::string w;
    CHECK(load_error(R"({"type":"feedback","arms":[{"alpha":0.1,"beta":0.1,"r":1},{"alpha":0.6,"beta":0.5,"r":1}]})",
                     &w) == ErrorKind::InvalidInput);
    CHECK(w.find("arms[1]") != std::string::npos);
    CHECK(w.find("1 - delta") != std::string::npos);

    CHECK(load_error(R"({"type":"feedback","arms":[{"alpha":"x","beta":0.1,"r":1}]})", &w) == ErrorKind::InvalidInput);
    CHECK(w.find("arms[0].alpha") != std::string::npos);
    CHECK(load_error(R"({"type":"feedback","arms":[{"alpha":0.1,"beta":0.1}]})", &w) == ErrorKind::InvalidInput);
    CHECK(w.find("arms[0].r") != std::string::npos);
    CHECK(load_error(R"({"type":"feedback","arms":[{"alpha":0.1,"beta":0.1,"r":1,"extra":2}]})", &w) ==
          ErrorKind::InvalidInput);
    CHECK(w.find("arms[0].extra") != std::string::npos);
    CHECK(load_error(R"({"type":"bandit","arms":[]})") == ErrorKind::InvalidInput);
    CHECK(load_error("{not json") == ErrorKind::InvalidInput);
    CHECK(load_error(R"({"type":"feedback","delta":0.7,"arms":[{"alpha":0.1,"beta":0.1,"r":1}]})") ==
          ErrorKind::ParameterOutOfRange);

    // decreasing escape function
    CHECK(load_error(R"({"type":"monotone","arms":[{"states":[{"r":1,"f_breakpoints":[[1,0.5],[3,0.2]]}],"q":[[0]]}]})",
                     &w) == ErrorKind::InvalidInput);
    CHECK(w.find("arms[0].states[0].f_breakpoints") != std::string::npos);
    CHECK(load_error(R"({"type":"monotone","arms":[{"states":[{"r":1,"f_breakpoints":[[1,0.5]],"duration":2}],
                         "q":[[0]]}],"switch_out":[0.1],"switch_in":[0]})") == ErrorKind::VariantMismatch);

    CHECK(load_error(R"({"type":"replenish","machines":[{"reward":[1,0],"repair_cost":[0,0],
                         "p":[[0.5,0.4],[0,1]],"s":0.5}]})", &w) == ErrorKind::InvalidInput);
    CHECK(w.find("machines[0]") != std::string::npos);
    CHECK(load_error(R"({"type":"probe","arms":[{"alpha":0.1,"beta":0.1,"r":1,"cost":-1}]})", &w) ==
          ErrorKind::InvalidInput);
    CHECK(w.find("arms[0].cost") != std::string::npos);

    std::string ns = nonseparable_gap(4).dump();
    CHECK(load_error(ns) == ErrorKind::UnsupportedShape);
}

TEST_CASE("optional fields take their defaults") {
    AnyInstance a = parse_instance(R"({"type":"monotone","arms":[{"states":[{"r":1,"f_breakpoints":[[1,1]]}],"q":[[0]]}]})");
    const auto& m = std::get<MonotoneInstance>(a);
    CHECK(m.M == 1);
    CHECK(m.arms[0].states[0].duration == 1);
    CHECK(m.switch_in.empty());
    AnyInstance f = parse_instance(R"({"type":"feedback","arms":[{"alpha":0.1,"beta":0.1,"r":1}]})");
    CHECK(std::get<FeedbackInstance>(f).delta == kDefaultDelta);
}
