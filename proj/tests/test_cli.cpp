#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run rbtool(const std::string& args) {
    std::string cmd = std::string(RBTOOL_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    Run r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string write_tmp(const std::string& name, const std::string& text) {
    std::string path = std::string(CLI_TMP_DIR) + "/" + name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("index on the three-arm example reports the multiplier and waiting times") {
    Run r = rbtool("index index-gap");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["lambda_star"].get<double>() > 0.0);
    CHECK(j["arms"].size() == 3);
    CHECK(j["arms"][1]["t"] == j["arms"][2]["t"]);
    CHECK(j["arms"][1]["whittle"]["g:1"].get<double>() == doctest::Approx(1.8));
}

TEST_CASE("exit codes") {
    std::string bad = write_tmp("bad.json", R"({"type":"feedback","arms":[{"alpha":0.7,"beta":0.5,"r":1}]})");
    Run r = rbtool("index " + bad);
    CHECK(r.code == 2);
    CHECK(r.out.find("arms[0]") != std::string::npos);
    CHECK(rbtool("simulate index-gap no-such-policy").code == 2);
    CHECK(rbtool("simulate missing-file.json balanced").code == 2);
    CHECK(rbtool("frobnicate").code == 2);
    // a joint belief space far above the exact-evaluation limit
    Run big = rbtool("simulate \"lp-gap(50,1e-5)\" balanced --exact --tmax 100");
    CHECK(big.code == 3);
    CHECK(big.out.find("StateSpaceTooLarge") != std::string::npos);
}

TEST_CASE("simulate is byte-reproducible and the exact mode returns one number") {
    Run a = rbtool("simulate index-gap balanced --seed 7 --horizon 20000 --reps 3");
    Run b = rbtool("simulate index-gap balanced --seed 7 --horizon 20000 --reps 3");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    Run c = rbtool("simulate index-gap balanced --seed 8 --horizon 20000 --reps 3 --format csv");
    CHECK(c.out.rfind("rep,mean\n", 0) == 0);

    Run e = rbtool("simulate index-gap balanced --exact");
    REQUIRE(e.code == 0);
    double exact = nlohmann::json::parse(e.out)["exact"].get<double>();
    auto idx = nlohmann::json::parse(rbtool("index index-gap").out);
    CHECK(exact >= 0.5 * idx["lp_upper_bound"].get<double>());
}

TEST_CASE("files round-trip through emit and load") {
    Run e = rbtool("emit \"replenish-gap(10)\"");
    REQUIRE(e.code == 0);
    std::string path = write_tmp("rg.json", e.out);
    Run again = rbtool("emit " + path);
    CHECK(again.out == e.out);
    Run bal = rbtool("simulate " + path + " balanced --exact");
    Run base = rbtool("simulate " + path + " plain-whittle --exact");
    REQUIRE(bal.code == 0);
    REQUIRE(base.code == 0);
    double x = nlohmann::json::parse(bal.out)["exact"].get<double>();
    double y = nlohmann::json::parse(base.out)["exact"].get<double>();
    CHECK(x / y >= 50.0);
}

TEST_CASE("monotone and probe files") {
    std::string mono = write_tmp("m.json", R"({"type":"monotone","M":1,"arms":[
        {"states":[{"r":1,"f_breakpoints":[[1,0.1],[4,0.6]]},{"r":0.2,"f_breakpoints":[[1,0.3]]}],"q":[[0,1],[1,0]]},
        {"states":[{"r":0.8,"f_breakpoints":[[1,0.2],[3,0.5]]}],"q":[[0]]}]})");
    Run m = rbtool("index " + mono);
    REQUIRE(m.code == 0);
    auto j = nlohmann::json::parse(m.out);
    CHECK(j["arms"][0]["states"].size() == 2);
    CHECK(j["arms"][0]["states"][0]["class"].is_string());
    CHECK(rbtool("simulate " + mono + " balanced --horizon 5000 --reps 2").code == 0);
    CHECK(rbtool("simulate " + mono + " myopic").code == 2);

    std::string probe = write_tmp("p.json", R"({"type":"probe","arms":[{"alpha":0.1,"beta":0.2,"r":1,"cost":0.1}]})");
    Run p = rbtool("index " + probe);
    REQUIRE(p.code == 0);
    CHECK(nlohmann::json::parse(p.out)["arms"][0]["e"].get<int>() >= 1);
}

TEST_CASE("gap reports") {
    Run r = rbtool("gap lp-gap --n 50 --beta 1e-5");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["all_pass"] == true);
    Run ns = rbtool("gap nonseparable-gap --n 4");
    REQUIRE(ns.code == 0);
    CHECK(nlohmann::json::parse(ns.out)["arms"].size() == 4);
}
